#include "shadecal/synth.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"
#include "shadecal/image_io.hpp"

namespace shadecal {

using nlohmann::json;

void ForwardCameraModel::validate() const {
  if (!m.allFinite()) throw Error(ErrorKind::InvalidInput, "camera matrix has non-finite entries");
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 0) || sv(0) / sv(2) >= 1e4) {
    throw Error(ErrorKind::InvalidInput, "camera matrix is singular or badly conditioned");
  }
  for (int c = 0; c < 3; ++c) {
    const auto& p = encode[c];
    if (!(p.gain > 0)) throw Error(ErrorKind::InvalidInput, "camera gain must be positive");
    if (!(p.gamma >= kMinGamma && p.gamma <= kMaxGamma)) {
      throw Error(ErrorKind::InvalidInput, "camera gamma must lie in [0.2, 5]");
    }
    if (!std::isfinite(p.offset)) throw Error(ErrorKind::InvalidInput, "camera offset must be finite");
  }
  if (!(noise_sigma >= 0)) throw Error(ErrorKind::InvalidInput, "noise sigma must be nonnegative");
}

json camera_to_json(const ForwardCameraModel& camera) {
  json m = json::array();
  for (int r = 0; r < 3; ++r) m.push_back(json::array({camera.m(r, 0), camera.m(r, 1), camera.m(r, 2)}));
  json encode = json::array();
  for (int c = 0; c < 3; ++c) {
    encode.push_back(json{{"gain", camera.encode[c].gain}, {"gamma", camera.encode[c].gamma}, {"offset", camera.encode[c].offset}});
  }
  return json{{"m", m}, {"encode", encode}, {"noise_sigma", camera.noise_sigma}, {"seed", camera.seed}, {"rng", Rng::kAlgorithm}};
}

ForwardCameraModel camera_from_json(const json& j) {
  try {
    ForwardCameraModel cam;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cam.m(r, c) = j.at("m").at(r).at(c).get<double>();
    }
    for (int c = 0; c < 3; ++c) {
      const auto& e = j.at("encode").at(c);
      cam.encode[c] = {e.at("gain").get<double>(), e.at("gamma").get<double>(), e.at("offset").get<double>()};
    }
    cam.noise_sigma = j.value("noise_sigma", 0.0);
    cam.seed = j.value("seed", std::uint64_t(0));
    cam.validate();
    return cam;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("camera: ") + e.what());
  }
}

ForwardCameraModel random_camera(std::uint64_t seed, const CameraDraw& draw) {
  Rng rng(seed);
  Eigen::Matrix3d crosstalk = Eigen::Matrix3d::Identity();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r != c) crosstalk(r, c) = rng.uniform(0.0, 0.15);
    }
  }
  // XYZ (D50) to linear sRGB primaries, Bradford-adapted.
  Eigen::Matrix3d primaries;
  primaries << 3.1338561, -1.6168667, -0.4906146,  //
      -0.9787684, 1.9161415, 0.0334540,             //
      0.0719453, -0.2289914, 1.4052427;
  Eigen::Matrix3d m = crosstalk * primaries;
  // Response to a Y = 100 white, in linear units, with a mild per-channel cast.
  const double white_level = rng.uniform(80.0, 95.0);
  for (int r = 0; r < 3; ++r) {
    const double white_response = white_level * rng.uniform(0.97, 1.03);
    m.row(r) *= white_response / (m.row(r) * kD50.xyz().vec());
  }
  ForwardCameraModel cam;
  cam.m = m;
  for (int c = 0; c < 3; ++c) {
    cam.encode[c] = {rng.uniform(95.0, 110.0), rng.uniform(draw.gamma_min, draw.gamma_max), rng.uniform(0.0, 1.5)};
  }
  cam.noise_sigma = draw.noise_sigma;
  cam.seed = seed;
  cam.validate();
  return cam;
}

RenderedPatch render_patch(const XYZ& xyz, const ForwardCameraModel& camera, Rng& rng) {
  const Eigen::Vector3d linear = camera.m * xyz.vec();
  RenderedPatch out;
  for (int c = 0; c < 3; ++c) {
    const auto& curve = camera.encode[c];
    double v = 0;
    if (linear(c) < curve.offset) {
      out.out_of_gamut = true;
    } else {
      v = delinearize(linear(c), curve);
      if (v > 255) {
        out.out_of_gamut = true;
        v = 255;
      }
    }
    if (camera.noise_sigma > 0) v += rng.normal(0.0, camera.noise_sigma);
    out.rgb(c) = std::clamp(v, 0.0, 255.0);
  }
  return out;
}

RenderedPatch render_patch(const XYZ& xyz, const ForwardCameraModel& camera) {
  Rng rng(camera.seed);
  return render_patch(xyz, camera, rng);
}

const std::map<int, Lab>& default_chromatic_lab() {
  // Skin-like tones (1-5, 24-30) and moderately saturated hues around them.
  static const std::map<int, Lab> table = {
      {1, {65, 18, 20}},  {2, {55, 15, 22}},  {3, {45, 14, 18}},  {4, {38, 12, 14}},  {5, {72, 12, 16}},
      {18, {50, 35, 20}}, {19, {55, -30, 25}}, {20, {45, 10, -35}}, {21, {70, -5, 45}}, {22, {60, 30, -15}},
      {23, {60, -25, -15}}, {24, {40, 25, 25}}, {25, {80, 5, 25}},  {26, {68, 20, 28}}, {27, {58, 22, 30}},
      {28, {48, 18, 24}}, {29, {75, 8, 10}},  {30, {62, 10, 14}},  {31, {52, -10, -20}}, {32, {42, 30, 5}},
      {33, {66, -15, 10}}, {34, {35, 5, -20}}, {35, {85, 2, 12}},
  };
  return table;
}

std::map<int, XYZ> default_references() {
  std::map<int, XYZ> refs;
  for (const auto& [id, lab] : default_chromatic_lab()) refs[id] = lab_to_xyz(lab, kD50);
  // Neutral ramp, ids 6..17, geometric in Y from 3 to 95.
  for (int k = 0; k < 12; ++k) {
    const double y = 3.0 * std::pow(95.0 / 3.0, k / 11.0);
    refs[6 + k] = XYZ(kD50.xyz().vec() * (y / 100.0));
  }
  return refs;
}

namespace {

std::array<std::array<int, 16>, 16> bayer16() {
  std::array<std::array<int, 16>, 16> m{};
  m[0][0] = 0;
  for (int size = 1; size < 16; size *= 2) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const int v = 4 * m[y][x];
        m[y][x] = v;
        m[y][x + size] = v + 2;
        m[y + size][x] = v + 3;
        m[y + size][x + size] = v + 1;
      }
    }
  }
  return m;
}

}  // namespace

void paint_dithered(RgbImage& image, const Rect& rect, const DeviceRGB& value) {
  static const auto matrix = bayer16();
  for (int y = std::max(0, rect.y); y < std::min(image.height(), rect.y + rect.h); ++y) {
    for (int x = std::max(0, rect.x); x < std::min(image.width(), rect.x + rect.w); ++x) {
      const double threshold = (matrix[y % 16][x % 16] + 0.5) / 256.0;
      std::uint8_t out[3];
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(value(c), 0.0, 255.0);
        const double base = std::floor(v);
        const int level = int(base) + (threshold < v - base ? 1 : 0);
        out[c] = std::uint8_t(std::min(level, 255));
      }
      image.set(x, y, out[0], out[1], out[2]);
    }
  }
}

SyntheticChart synth_chart(const std::map<int, XYZ>& references, const ForwardCameraModel& camera, int extra_width) {
  camera.validate();
  if (references.size() > std::size_t(kChartColumns * kChartRows)) {
    throw Error(ErrorKind::InvalidInput, "synthetic chart holds at most 35 patches");
  }
  SyntheticChart chart;
  chart.references = references;
  chart.image = RgbImage(kChartColumns * kPatchSize + std::max(0, extra_width), kChartRows * kPatchSize);
  chart.image.fill({0, 0, chart.image.width(), chart.image.height()}, 128, 128, 128);

  const auto& gray = chart.annotation.gray_patch_ids;
  Rng rng(camera.seed);
  int k = 0;
  for (const auto& [id, xyz] : references) {
    const auto rendered = render_patch(xyz, camera, rng);
    if (rendered.out_of_gamut) ++chart.out_of_gamut;
    chart.observations.push_back({id, rendered.rgb, xyz});
    const Rect rect{(k % kChartColumns) * kPatchSize, (k / kChartColumns) * kPatchSize, kPatchSize, kPatchSize};
    paint_dithered(chart.image, rect, rendered.rgb);
    const bool neutral = std::find(gray.begin(), gray.end(), id) != gray.end();
    chart.annotation.regions.push_back({id, std::nullopt, std::string(neutral ? "neutral" : "chromatic"), rect});
    ++k;
  }
  return chart;
}

MixingModel MixingModel::default_blend() {
  MixingModel m;
  m.w << 0.35, 0.00, 0.00, 0.60, 0.03, 0.02,
         0.01, 0.30, 0.00, -0.01, 0.65, 0.00,
         0.00, 0.00, 0.30, 0.02, 0.00, 0.62;
  m.c << 2.0, 0.5, 1.0;
  m.sigma = 0.5;
  return m;
}

std::vector<std::string> standard_shades() {
  std::vector<std::string> shades;
  for (int tier = 1; tier <= 5; ++tier) {
    for (int step = 0; step < 6; ++step) shades.push_back(std::to_string(tier * 100 + step * 10));
  }
  return shades;
}

SyntheticDataset synth_prediction_dataset(const SynthDatasetOptions& options) {
  if (options.n_subjects < 1) throw Error(ErrorKind::InvalidInput, "need at least one subject");
  if (!(options.mixing.sigma >= 0)) throw Error(ErrorKind::InvalidInput, "mixing sigma must be nonnegative");
  const auto shades = options.shades.empty() ? standard_shades() : options.shades;
  const int base = options.target_rows / options.n_subjects;
  const int extra = options.target_rows % options.n_subjects;
  if (base < 1 || base + (extra > 0 ? 1 : 0) > int(shades.size())) {
    throw Error(ErrorKind::InvalidInput, "target rows incompatible with subject and shade counts");
  }

  Rng rng(options.seed);
  SyntheticDataset out;
  out.mixing = options.mixing;

  // Darker tiers (higher codes) get lower L and warmer chroma.
  for (std::size_t k = 0; k < shades.size(); ++k) {
    const double t = double(k) / double(std::max<std::size_t>(1, shades.size() - 1));
    out.foundations[shades[k]] = Lab(74.0 - 28.0 * t + rng.uniform(-1.0, 1.0), 14.0 + 6.0 * t + rng.uniform(-1.0, 1.0),
                                     11.0 + 6.0 * t + rng.uniform(-1.5, 1.5));
  }

  for (int s = 0; s < options.n_subjects; ++s) {
    char id[16];
    std::snprintf(id, sizeof(id), "S%02d", s + 1);
    const Lab skin(rng.uniform(48.0, 72.0), rng.uniform(15.0, 22.0), rng.uniform(9.0, 16.0));
    out.skins[id] = skin;

    std::vector<std::string> ranked = shades;
    std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
      return std::abs(out.foundations[a](0) - skin(0)) < std::abs(out.foundations[b](0) - skin(0));
    });
    const int count = base + (s < extra ? 1 : 0);
    ranked.resize(std::size_t(count));
    std::sort(ranked.begin(), ranked.end());
    for (const auto& shade : ranked) {
      SampleRow row;
      row.subject_id = id;
      row.shade = shade;
      row.input << skin.vec(), out.foundations[shade].vec();
      row.target = options.mixing.w * row.input + options.mixing.c;
      for (int k = 0; k < 3; ++k) row.target(k) += options.mixing.sigma * rng.normal();
      out.rows.push_back(row);
    }
  }
  return out;
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over base + index.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void write_json(const std::filesystem::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json mixing_to_json(const MixingModel& m) {
  json w = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 6; ++c) row.push_back(m.w(r, c));
    w.push_back(row);
  }
  return json{{"w", w}, {"c", json::array({m.c(0), m.c(1), m.c(2)})}, {"sigma", m.sigma}};
}

constexpr int kSubjectExtraWidth = 192;
constexpr Rect kFaceRect{kChartColumns * kPatchSize + 32, 96, 128, 128};

}  // namespace

void write_chart_bundle(const std::filesystem::path& dir, const ForwardCameraModel& camera,
                        const std::map<int, XYZ>& references, const json& config) {
  std::filesystem::create_directories(dir);
  auto chart = synth_chart(references, camera);
  chart.annotation.image = "chart.png";
  save_png(dir / "chart.png", chart.image);
  save_annotation(dir / "chart.json", chart.annotation);
  write_file_atomic(dir / "references.csv", references_to_csv(references));
  write_json(dir / "camera.json", camera_to_json(camera));
  write_json(dir / "manifest.json", json{{"kind", "chart"},
                                         {"rng", Rng::kAlgorithm},
                                         {"seed", camera.seed},
                                         {"out_of_gamut_patches", chart.out_of_gamut},
                                         {"files", {"chart.png", "chart.json", "references.csv", "camera.json"}},
                                         {"config", config}});
}

void write_dataset_bundle(const std::filesystem::path& dir, const ForwardCameraModel& camera,
                          const SynthDatasetOptions& options, const json& config) {
  std::filesystem::create_directories(dir);
  const auto data = synth_prediction_dataset(options);
  const auto references = default_references();
  write_file_atomic(dir / "references.csv", references_to_csv(references));
  write_file_atomic(dir / "truth.csv", dataset_to_csv(data.rows));
  write_json(dir / "camera.json", camera_to_json(camera));

  json images = json::array();
  int out_of_gamut = 0;
  std::uint64_t index = 0;

  auto subject_image = [&](const std::string& stem, const std::string& subject, Role role, const std::string& shade,
                           const Lab& lab) {
    ForwardCameraModel cam = camera;
    cam.seed = derive_seed(camera.seed, index++);
    auto chart = synth_chart(references, cam, kSubjectExtraWidth);
    out_of_gamut += chart.out_of_gamut;
    Rng rng(derive_seed(cam.seed, 0xFACE));
    const auto face = render_patch(lab_to_xyz(lab, kD50), cam, rng);
    if (face.out_of_gamut) ++out_of_gamut;
    paint_dithered(chart.image, kFaceRect, face.rgb);

    chart.annotation.image = stem + ".png";
    save_png(dir / (stem + ".png"), chart.image);
    save_annotation(dir / (stem + ".chart.json"), chart.annotation);
    save_mask_png(dir / (stem + ".mask.png"), SkinMask::from_rect(chart.image.width(), chart.image.height(), kFaceRect));
    Annotation regions;
    regions.image = stem + ".png";
    regions.regions.push_back({std::nullopt, shade.empty() ? std::nullopt : std::optional<std::string>(shade),
                               std::string(role_name(role)), kFaceRect});
    save_annotation(dir / (stem + ".regions.json"), regions);
    images.push_back(json{{"image", stem + ".png"},
                          {"chart", stem + ".chart.json"},
                          {"regions", stem + ".regions.json"},
                          {"mask", stem + ".mask.png"},
                          {"subject_id", subject},
                          {"role", role_name(role)},
                          {"shade", shade}});
  };

  for (const auto& [subject, skin] : data.skins) {
    subject_image("subject_" + subject + "_bare_skin", subject, Role::BareSkin, "", skin);
    for (const auto& row : data.rows) {
      if (row.subject_id != subject) continue;
      subject_image("subject_" + subject + "_skin_with_foundation_" + row.shade, subject, Role::SkinWithFoundation,
                    row.shade, Lab(row.target));
    }
  }

  // Swatch card: every shade on a 6-column grid beside the chart.
  {
    ForwardCameraModel cam = camera;
    cam.seed = derive_seed(camera.seed, index++);
    const int columns = 6;
    const int rows = int((data.foundations.size() + columns - 1) / columns);
    auto chart = synth_chart(references, cam, columns * kPatchSize);
    if (rows > kChartRows) throw Error(ErrorKind::InvalidInput, "too many shades for the swatch card");
    out_of_gamut += chart.out_of_gamut;
    Rng rng(derive_seed(cam.seed, 0x5A7C));
    Annotation regions;
    regions.image = "swatches.png";
    int k = 0;
    for (const auto& [shade, lab] : data.foundations) {
      const Rect rect{kChartColumns * kPatchSize + (k % columns) * kPatchSize, (k / columns) * kPatchSize, kPatchSize, kPatchSize};
      const auto swatch = render_patch(lab_to_xyz(lab, kD50), cam, rng);
      if (swatch.out_of_gamut) ++out_of_gamut;
      paint_dithered(chart.image, rect, swatch.rgb);
      regions.regions.push_back({std::nullopt, shade, std::string(role_name(Role::FoundationSwatch)), rect});
      ++k;
    }
    chart.annotation.image = "swatches.png";
    save_png(dir / "swatches.png", chart.image);
    save_annotation(dir / "swatches.chart.json", chart.annotation);
    save_annotation(dir / "swatches.regions.json", regions);
    images.push_back(json{{"image", "swatches.png"},
                          {"chart", "swatches.chart.json"},
                          {"regions", "swatches.regions.json"},
                          {"mask", nullptr},
                          {"subject_id", ""},
                          {"role", role_name(Role::FoundationSwatch)},
                          {"shade", ""}});
  }

  write_json(dir / "manifest.json", json{{"kind", "dataset"},
                                         {"rng", Rng::kAlgorithm},
                                         {"seed", options.seed},
                                         {"camera_seed", camera.seed},
                                         {"rows", data.rows.size()},
                                         {"mixing", mixing_to_json(data.mixing)},
                                         {"out_of_gamut_renders", out_of_gamut},
                                         {"images", images},
                                         {"config", config}});
}

}  // namespace shadecal
