// shadecal: chart calibration, region extraction and shade prediction.
//
// Exit codes: 0 success, 1 input/parse error, 2 domain error (empty mask or
// region, short or unpaired dataset), 3 calibration outlier.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "shadecal/annotation.hpp"
#include "shadecal/calibration.hpp"
#include "shadecal/dataset.hpp"
#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"
#include "shadecal/image_io.hpp"
#include "shadecal/profile_io.hpp"
#include "shadecal/shade_model.hpp"
#include "shadecal/skin.hpp"
#include "shadecal/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shadecal;

namespace {

enum Exit : int { kOk = 0, kInputError = 1, kDomainError = 2, kOutlier = 3 };

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, std::string(what) + ": invalid number '" + field + "'");
    }
  }
  if (values.size() != expected) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + ": expected " + std::to_string(expected) + " comma-separated values");
  }
  return values;
}

Rect parse_rect(const std::string& text) {
  const auto v = parse_numbers(text, 4, "rect");
  return {int(v[0]), int(v[1]), int(v[2]), int(v[3])};
}

WhitePoint parse_white(const std::string& text) {
  const auto v = parse_numbers(text, 3, "white point");
  WhitePoint w{v[0], v[1], v[2]};
  if (!w.valid()) throw Error(ErrorKind::InvalidInput, "white point components must be positive");
  return w;
}

json white_json(const WhitePoint& w) { return json::array({w.xn, w.yn, w.zn}); }

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  return fs::path(out.string() + suffix);
}

void echo_config(const std::string& command, const json& config) {
  std::cerr << command << " config: " << config.dump() << "\n";
}

// Options shared by several subcommands.
struct Common {
  std::string white = "96.42,100,82.52";
  double svr_c = 1.0;
  double svr_eps = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

void add_white(CLI::App* cmd, Common& c) {
  cmd->add_option("--white-point", c.white, "Reference white X,Y,Z")->capture_default_str();
}
void add_svr(CLI::App* cmd, Common& c) {
  cmd->add_option("--svr-c", c.svr_c, "SVR box constraint")->capture_default_str();
  cmd->add_option("--svr-eps", c.svr_eps, "SVR tube half-width")->capture_default_str();
}

// --- mask ------------------------------------------------------------------

struct MaskArgs {
  std::string image;
  std::string roi;
};

int run_mask(const MaskArgs& a, const Common& c) {
  const json config{{"command", "mask"}, {"image", a.image}, {"roi", a.roi}, {"out", c.out}};
  echo_config("mask", config);
  const RgbImage image = load_image(a.image);
  const Rect roi = a.roi.empty() ? Rect{} : parse_rect(a.roi);
  const SkinMask mask = skin_mask(image, roi);
  const DeviceRGB mean = mask_mean_rgb(image, mask);
  save_mask_png(c.out, mask);
  write_json(sibling(c.out, ".json"), json{{"mean_rgb", json::array({mean(0), mean(1), mean(2)})},
                                           {"pixel_count", mask.pixel_count()},
                                           {"width", mask.width()},
                                           {"height", mask.height()},
                                           {"config", config}});
  std::cout << "skin pixels: " << mask.pixel_count() << "  mean RGB: " << mean(0) << ", " << mean(1) << ", " << mean(2)
            << "\n";
  return kOk;
}

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  std::string image;
  std::string annotation;
  std::string references;
  std::string skin_mask;
  std::string source_id;
};

int run_calibrate(const CalibrateArgs& a, const Common& c) {
  const WhitePoint white = parse_white(c.white);
  const std::string source = a.source_id.empty() ? fs::path(a.image).filename().string() : a.source_id;
  const json config{{"command", "calibrate"},      {"image", a.image},         {"annotation", a.annotation},
                    {"references", a.references},  {"skin_centroid_from", a.skin_mask},
                    {"source_id", source},         {"white_point", white_json(white)}, {"out", c.out}};
  echo_config("calibrate", config);

  const RgbImage image = load_image(a.image);
  const Annotation annotation = load_annotation(a.annotation);
  const auto references = load_references(a.references);
  const auto chart = extract_patches(image, annotation, references);

  BuildOptions options;
  options.gray_ids = annotation.gray_patch_ids;
  options.white = white;
  options.source_id = source;
  if (!a.skin_mask.empty()) {
    const SkinMask mask = load_mask(a.skin_mask);
    options.skin_centroid = mask_mean_rgb(image, mask);
  }
  const CalibrationProfile profile = build_profile(chart, options);

  json pj = profile_to_json(profile);
  pj["config"] = config;
  write_json(c.out, pj);

  std::ostringstream csv;
  csv << "patch_id,delta_e76\n";
  for (const auto& d : profile.diagnostics) csv << d.patch_id << ',' << format_double(d.delta_e) << '\n';
  write_file_atomic(sibling(c.out, ".delta_e.csv"), csv.str());
  write_json(sibling(c.out, ".report.json"), json{{"source_id", source},
                                                  {"mean_delta_e76", profile.mean_delta_e},
                                                  {"outlier", profile.outlier},
                                                  {"outlier_threshold", kOutlierMeanDeltaE},
                                                  {"per_patch", pj["diagnostics"]["per_patch"]},
                                                  {"config", config}});

  std::cout << "mean ΔE76: " << profile.mean_delta_e << (profile.outlier ? "  (outlier)" : "") << "\n";
  return profile.outlier ? kOutlier : kOk;
}

// --- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string image;
  std::string profile;
  std::string regions;
  std::string rect;
  std::string mask;
  std::string role;
  std::string shade;
  std::string subject;
  std::string source_id;
};

// subject_<id>_<role>[_<shade>].png
void identity_from_filename(const std::string& name, std::string& subject, std::string& role, std::string& shade) {
  static const std::regex pattern(R"(subject_([^_]+)_(bare_skin|skin_with_foundation|foundation_swatch)(?:_([^_.]+))?\.\w+)");
  std::smatch m;
  if (std::regex_match(name, m, pattern)) {
    if (subject.empty()) subject = m[1];
    if (role.empty()) role = m[2];
    if (shade.empty() && m[3].matched) shade = m[3];
  }
}

int run_extract(const ExtractArgs& a, const Common& c) {
  const WhitePoint white = parse_white(c.white);
  std::string subject = a.subject, role = a.role, shade = a.shade;
  const std::string file_name = fs::path(a.image).filename().string();
  identity_from_filename(file_name, subject, role, shade);
  const std::string source = a.source_id.empty() ? file_name : a.source_id;
  const json config{{"command", "extract"}, {"image", a.image},   {"profile", a.profile}, {"regions", a.regions},
                    {"rect", a.rect},       {"mask", a.mask},     {"role", role},       {"shade", shade},
                    {"subject", subject},   {"source_id", source}, {"white_point", white_json(white)}, {"out", c.out}};
  echo_config("extract", config);

  const int specs = int(!a.regions.empty()) + int(!a.rect.empty()) + int(!a.mask.empty());
  if (specs != 1) throw Error(ErrorKind::InvalidInput, "give exactly one of --regions, --rect, --mask");

  const CalibrationProfile profile = load_profile(a.profile);
  const RgbImage image = load_image(a.image);
  const XyzImage xyz = apply_profile(image, profile);

  std::vector<RegionColor> rows = fs::exists(c.out) ? load_regions(c.out) : std::vector<RegionColor>{};
  auto add = [&](const RegionAverage& avg, const std::string& role, const std::string& region_shade) {
    if (role.empty()) throw Error(ErrorKind::InvalidInput, "region role missing (use --role)");
    RegionColor r;
    r.source_id = source;
    r.role = parse_role(role);
    r.subject_id = r.role == Role::FoundationSwatch ? "" : subject;
    r.shade = r.role == Role::BareSkin ? "" : region_shade;
    if (r.role != Role::BareSkin && r.shade.empty()) throw Error(ErrorKind::InvalidInput, "foundation region needs a shade");
    if (r.role != Role::FoundationSwatch && r.subject_id.empty()) {
      throw Error(ErrorKind::InvalidInput, "subject id missing (use --subject or the subject_<id>_<role> file naming)");
    }
    r.lab = avg.lab;
    r.pixel_count = avg.pixel_count;
    r.calibration_delta_e = profile.mean_delta_e;
    r.outlier = profile.outlier;
    upsert_region(rows, r);
    std::cout << role_name(r.role) << (r.shade.empty() ? "" : " " + r.shade) << ": L*a*b* = " << r.lab(0) << ", "
              << r.lab(1) << ", " << r.lab(2) << " (" << r.pixel_count << " px)\n";
  };

  if (!a.regions.empty()) {
    const Annotation ann = load_annotation(a.regions);
    if (ann.regions.empty()) throw Error(ErrorKind::Domain, "region annotation lists no regions");
    for (const auto& region : ann.regions) {
      const std::string region_role = region.role.value_or(role);
      const std::string region_shade = region.shade.value_or(shade);
      add(extract_region_color(xyz, region.rect.center_half(), white), region_role, region_shade);
    }
  } else if (!a.rect.empty()) {
    add(extract_region_color(xyz, parse_rect(a.rect), white), role, shade);
  } else {
    const SkinMask mask = load_mask(a.mask);
    add(extract_region_color(xyz, mask, white), role, shade);
  }
  write_file_atomic(c.out, regions_to_csv(rows));
  return kOk;
}

// --- train / loocv / predict -----------------------------------------------

struct DataArgs {
  std::string dataset;
  std::string regions;
  std::string model = "linear";
  std::string save_dataset;
  unsigned threads = 1;
};

std::vector<SampleRow> load_rows(const DataArgs& a) {
  if (a.dataset.empty() == a.regions.empty()) throw Error(ErrorKind::InvalidInput, "give exactly one of --dataset, --regions");
  auto rows = a.dataset.empty() ? assemble_dataset(load_regions(a.regions)) : load_dataset(a.dataset);
  if (!a.save_dataset.empty()) save_dataset(a.save_dataset, rows);
  return rows;
}

json data_config(const char* command, const DataArgs& a, const Common& c) {
  return json{{"command", command},          {"dataset", a.dataset}, {"regions", a.regions},     {"model", a.model},
              {"svr_c", c.svr_c},            {"svr_eps", c.svr_eps}, {"save_dataset", a.save_dataset},
              {"out", c.out}};
}

int run_train(const DataArgs& a, const Common& c) {
  const json config = data_config("train", a, c);
  echo_config("train", config);
  const ModelKind kind = parse_model_kind(a.model);
  const auto rows = load_rows(a);
  if (rows.size() < 3) throw Error(ErrorKind::Domain, "training needs at least 3 samples, got " + std::to_string(rows.size()));
  const ShadeModel model = train(rows, kind, {c.svr_c, c.svr_eps});
  if (const auto* svr = std::get_if<SvrModel>(&model)) {
    for (const auto& o : svr->outputs) {
      if (o.constant) std::cerr << "warning: identical inputs, SVR falls back to the median target\n";
    }
  }
  json j = model_to_json(model);
  j["training_rows"] = rows.size();
  j["config"] = config;
  write_json(c.out, j);
  std::cout << "trained " << model_kind_name(kind) << " model on " << rows.size() << " rows\n";
  return kOk;
}

int run_loocv(const DataArgs& a, const Common& c) {
  json config = data_config("loocv", a, c);
  echo_config("loocv", config);
  const ModelKind kind = parse_model_kind(a.model);
  const auto rows = load_rows(a);
  const EvalReport report = loocv(rows, kind, {c.svr_c, c.svr_eps}, a.threads);
  json j = report_to_json(report, rows);
  j["model"] = model_kind_name(kind);
  j["rows"] = rows.size();
  j["config"] = config;
  write_json(c.out, j);
  const std::string table = report_table(report, kind);
  write_file_atomic(sibling(c.out, ".txt"), table);
  write_file_atomic(sibling(c.out, ".residuals.csv"), residuals_csv(report, rows));
  std::cout << table;
  return kOk;
}

struct PredictArgs {
  std::string model;
  std::string input;
};

int run_predict(const PredictArgs& a) {
  echo_config("predict", json{{"command", "predict"}, {"model", a.model}, {"input", a.input}});
  const ShadeModel model = load_model(a.model);
  const auto v = parse_numbers(a.input, 6, "input");
  const SampleInput x = Eigen::Map<const SampleInput>(v.data());
  const Eigen::Vector3d lab = predict(model, x);
  std::cout << format_double(lab(0)) << "," << format_double(lab(1)) << "," << format_double(lab(2)) << "\n";
  return kOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "chart";
  std::optional<std::uint64_t> camera_seed;
  double noise = 0;
  double gamma_min = 1.8;
  double gamma_max = 2.4;
  int subjects = 19;
  int rows = 63;
  double sigma = 0.5;
  bool zero_mixing = false;
};

int run_synth(const SynthArgs& a, const Common& c) {
  if (!(a.gamma_min >= kMinGamma && a.gamma_max <= kMaxGamma && a.gamma_min <= a.gamma_max)) {
    throw Error(ErrorKind::InvalidInput, "gamma range must lie within [0.2, 5] with min <= max");
  }
  if (!(a.noise >= 0) || !(a.sigma >= 0)) throw Error(ErrorKind::InvalidInput, "noise and sigma must be nonnegative");
  const std::uint64_t camera_seed = a.camera_seed.value_or(c.seed);
  const json config{{"command", "synth"},       {"kind", a.kind},           {"seed", c.seed},
                    {"camera_seed", camera_seed}, {"noise", a.noise},         {"gamma_min", a.gamma_min},
                    {"gamma_max", a.gamma_max}, {"subjects", a.subjects},   {"rows", a.rows},
                    {"sigma", a.sigma},         {"zero_mixing", a.zero_mixing}, {"rng", Rng::kAlgorithm},
                    {"out", c.out}};
  echo_config("synth", config);

  const ForwardCameraModel camera = random_camera(camera_seed, {a.gamma_min, a.gamma_max, a.noise});
  SynthDatasetOptions options;
  options.n_subjects = a.subjects;
  options.target_rows = a.rows;
  options.seed = c.seed;
  options.mixing.sigma = a.sigma;
  if (a.zero_mixing) options.mixing.w.setZero();

  if (a.kind == "chart") {
    write_chart_bundle(c.out, camera, default_references(), config);
  } else if (a.kind == "dataset") {
    write_dataset_bundle(c.out, camera, options, config);
  } else {
    // rows: prediction dataset only, written as a dataset CSV
    save_dataset(c.out, synth_prediction_dataset(options).rows);
  }
  std::cout << "wrote " << a.kind << " bundle to " << c.out << "\n";
  return kOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Parse:
      return kInputError;
    case ErrorKind::Domain:
    case ErrorKind::Fit:
      return kDomainError;
  }
  return kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color-checker calibration and skin-with-foundation shade prediction"};
  app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
  app.require_subcommand(1);
  Common common;

  MaskArgs mask_args;
  auto* mask = app.add_subcommand("mask", "Skin mask (1-bit PNG) and mean RGB of an image");
  mask->add_option("--image", mask_args.image, "Input image")->required();
  mask->add_option("--roi", mask_args.roi, "Restrict detection to x,y,w,h");
  mask->add_option("--out", common.out, "Output mask PNG")->required();

  CalibrateArgs cal_args;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a calibration profile from a chart image");
  calibrate->add_option("--image", cal_args.image, "Image containing the chart")->required();
  calibrate->add_option("--annotation", cal_args.annotation, "Chart annotation JSON")->required();
  calibrate->add_option("--references", cal_args.references, "Reference XYZ CSV")->required();
  calibrate->add_option("--skin-centroid-from", cal_args.skin_mask, "Skin mask PNG; omit for swatch images");
  calibrate->add_option("--source-id", cal_args.source_id, "Image identifier (default: file name)");
  calibrate->add_option("--out", common.out, "Output profile JSON")->required();
  add_white(calibrate, common);

  ExtractArgs ext_args;
  auto* extract = app.add_subcommand("extract", "Average calibrated Lab over regions into a regions CSV");
  extract->add_option("--image", ext_args.image, "Input image")->required();
  extract->add_option("--profile", ext_args.profile, "Calibration profile JSON")->required();
  extract->add_option("--regions", ext_args.regions, "Region annotation JSON (central half of each rect)");
  extract->add_option("--rect", ext_args.rect, "Region rectangle x,y,w,h");
  extract->add_option("--mask", ext_args.mask, "Region mask PNG");
  extract->add_option("--role", ext_args.role, "bare_skin | foundation_swatch | skin_with_foundation");
  extract->add_option("--shade", ext_args.shade, "Shade code");
  extract->add_option("--subject", ext_args.subject, "Subject id");
  extract->add_option("--source-id", ext_args.source_id, "Image identifier (default: file name)");
  extract->add_option("--out", common.out, "Regions CSV to update")->required();
  add_white(extract, common);

  DataArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a shade model");
  DataArgs loocv_args;
  auto* loocv_cmd = app.add_subcommand("loocv", "Leave-one-out evaluation");
  for (auto [cmd, args] : {std::pair{train_cmd, &train_args}, std::pair{loocv_cmd, &loocv_args}}) {
    cmd->add_option("--dataset", args->dataset, "Dataset CSV");
    cmd->add_option("--regions", args->regions, "Regions CSV (assembled into a dataset)");
    cmd->add_option("--model", args->model, "linear | svr | mean")->capture_default_str();
    cmd->add_option("--save-dataset", args->save_dataset, "Write the assembled dataset CSV");
    cmd->add_option("--out", common.out, "Output JSON")->required();
    add_svr(cmd, common);
  }
  loocv_cmd->add_option("--threads", loocv_args.threads, "Fold worker threads")->capture_default_str();

  PredictArgs pred_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict skin-with-foundation Lab");
  predict_cmd->add_option("--model", pred_args.model, "Model JSON")->required();
  predict_cmd->add_option("--input", pred_args.input, "skin L,a,b,foundation L,a,b")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate synthetic charts, image bundles or datasets");
  synth->add_option("kind", synth_args.kind, "chart | dataset | rows")
      ->check(CLI::IsMember({"chart", "dataset", "rows"}))
      ->capture_default_str();
  synth->add_option("--seed", common.seed, "Seed")->capture_default_str();
  synth->add_option("--camera-seed", synth_args.camera_seed, "Camera seed (default: --seed)");
  synth->add_option("--noise", synth_args.noise, "Device noise sigma (counts)")->capture_default_str();
  synth->add_option("--gamma-min", synth_args.gamma_min, "Camera gamma lower bound")->capture_default_str();
  synth->add_option("--gamma-max", synth_args.gamma_max, "Camera gamma upper bound")->capture_default_str();
  synth->add_option("--subjects", synth_args.subjects, "Subjects")->capture_default_str();
  synth->add_option("--rows", synth_args.rows, "With-foundation samples")->capture_default_str();
  synth->add_option("--sigma", synth_args.sigma, "Mixing noise sigma (Lab units)")->capture_default_str();
  synth->add_flag("--zero-mixing", synth_args.zero_mixing, "Use W = 0 (targets independent of inputs)");
  synth->add_option("--out", common.out, "Output directory (file for rows)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*mask) return run_mask(mask_args, common);
    if (*calibrate) return run_calibrate(cal_args, common);
    if (*extract) return run_extract(ext_args, common);
    if (*train_cmd) return run_train(train_args, common);
    if (*loocv_cmd) return run_loocv(loocv_args, common);
    if (*predict_cmd) return run_predict(pred_args);
    if (*synth) return run_synth(synth_args, common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
