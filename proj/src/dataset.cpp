#include "shadecal/dataset.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "csv.hpp"
#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"

namespace shadecal {

const char* role_name(Role role) {
  switch (role) {
    case Role::BareSkin:
      return "bare_skin";
    case Role::FoundationSwatch:
      return "foundation_swatch";
    case Role::SkinWithFoundation:
      return "skin_with_foundation";
  }
  return "?";
}

Role parse_role(const std::string& name) {
  if (name == "bare_skin") return Role::BareSkin;
  if (name == "foundation_swatch") return Role::FoundationSwatch;
  if (name == "skin_with_foundation") return Role::SkinWithFoundation;
  throw Error(ErrorKind::Parse, "unknown role '" + name + "'");
}

RegionAverage extract_region_color(const XyzImage& image, const SkinMask& region, const WhitePoint& white) {
  if (region.width() != image.width() || region.height() != image.height()) {
    throw Error(ErrorKind::InvalidInput, "region mask does not match the image size");
  }
  if (region.pixel_count() == 0) throw Error(ErrorKind::Domain, "empty region");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (region.at(x, y)) sum += xyz_to_lab(image.at(x, y), white);
    }
  }
  return {Lab(sum / double(region.pixel_count())), region.pixel_count()};
}

RegionAverage extract_region_color(const XyzImage& image, const Rect& region, const WhitePoint& white) {
  if (region.empty()) throw Error(ErrorKind::Domain, "empty region");
  if (region.x < 0 || region.y < 0 || region.x + region.w > image.width() || region.y + region.h > image.height()) {
    throw Error(ErrorKind::InvalidInput, "region rectangle outside the image");
  }
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = region.y; y < region.y + region.h; ++y) {
    for (int x = region.x; x < region.x + region.w; ++x) sum += xyz_to_lab(image.at(x, y), white);
  }
  const std::size_t count = std::size_t(region.w) * std::size_t(region.h);
  return {Lab(sum / double(count)), count};
}

namespace {

auto region_key(const RegionColor& r) { return std::tie(r.source_id, r.role, r.shade); }

struct Counterpart {
  const RegionColor* usable = nullptr;  // first non-outlier region
  bool seen = false;
};

}  // namespace

std::vector<SampleRow> assemble_dataset(const std::vector<RegionColor>& regions) {
  std::vector<const RegionColor*> sorted;
  for (const auto& r : regions) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return region_key(*a) < region_key(*b); });

  std::map<std::string, Counterpart> bare, swatch;
  for (const auto* r : sorted) {
    if (r->role == Role::BareSkin) {
      if (r->subject_id.empty()) throw Error(ErrorKind::InvalidInput, "bare_skin region without subject id: " + r->source_id);
      auto& c = bare[r->subject_id];
      c.seen = true;
      if (!r->outlier && !c.usable) c.usable = r;
    } else if (r->role == Role::FoundationSwatch) {
      if (r->shade.empty()) throw Error(ErrorKind::InvalidInput, "foundation_swatch region without shade: " + r->source_id);
      auto& c = swatch[r->shade];
      c.seen = true;
      if (!r->outlier && !c.usable) c.usable = r;
    }
  }

  std::vector<SampleRow> rows;
  for (const auto* r : sorted) {
    if (r->role != Role::SkinWithFoundation) continue;
    if (r->subject_id.empty() || r->shade.empty()) {
      throw Error(ErrorKind::InvalidInput, "skin_with_foundation region needs subject and shade: " + r->source_id);
    }
    const auto b = bare.find(r->subject_id);
    if (b == bare.end()) {
      throw Error(ErrorKind::Domain, "unpaired sample: subject " + r->subject_id + " shade " + r->shade + " has no bare_skin region");
    }
    const auto s = swatch.find(r->shade);
    if (s == swatch.end()) {
      throw Error(ErrorKind::Domain, "unpaired sample: subject " + r->subject_id + " shade " + r->shade + " has no foundation_swatch region");
    }
    // Calibration outliers on either side drop the sample.
    if (r->outlier || !b->second.usable || !s->second.usable) continue;

    SampleRow row;
    row.subject_id = r->subject_id;
    row.shade = r->shade;
    row.input << b->second.usable->lab.vec(), s->second.usable->lab.vec();
    row.target = r->lab.vec();
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SampleRow& a, const SampleRow& b) {
    return std::tie(a.subject_id, a.shade) < std::tie(b.subject_id, b.shade);
  });
  return rows;
}

void upsert_region(std::vector<RegionColor>& rows, const RegionColor& row) {
  for (auto& r : rows) {
    if (region_key(r) == region_key(row)) {
      r = row;
      return;
    }
  }
  rows.push_back(row);
}

namespace {
constexpr const char* kRegionsHeader = "source_id,subject_id,role,shade,L,a,b,pixel_count,calib_mean_de76,outlier";
constexpr const char* kDatasetHeader = "subject_id,shade,skin_L,skin_a,skin_b,fnd_L,fnd_a,fnd_b,out_L,out_a,out_b";

void check_identifier(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorKind::InvalidInput, "identifier contains a comma or newline: '" + s + "'");
  }
}
}  // namespace

std::string regions_to_csv(const std::vector<RegionColor>& rows) {
  std::ostringstream out;
  out << kRegionsHeader << '\n';
  for (const auto& r : rows) {
    check_identifier(r.source_id);
    check_identifier(r.subject_id);
    check_identifier(r.shade);
    out << r.source_id << ',' << r.subject_id << ',' << role_name(r.role) << ',' << r.shade << ','
        << format_double(r.lab(0)) << ',' << format_double(r.lab(1)) << ',' << format_double(r.lab(2)) << ','
        << r.pixel_count << ',' << format_double(r.calibration_delta_e) << ',' << (r.outlier ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<RegionColor> regions_from_csv(const std::string& text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines[0] != kRegionsHeader) {
    throw Error(ErrorKind::Parse, std::string("regions file: expected header '") + kRegionsHeader + "'");
  }
  std::vector<RegionColor> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t ln = i + 1;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 10) throw Error(ErrorKind::Parse, csv::where(ln) + ": expected 10 fields");
    RegionColor r;
    r.source_id = f[0];
    r.subject_id = f[1];
    try {
      r.role = parse_role(f[2]);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, csv::where(ln) + ": " + e.what());
    }
    r.shade = f[3];
    r.lab = Lab(csv::parse_finite(f[4], ln), csv::parse_finite(f[5], ln), csv::parse_finite(f[6], ln));
    const long long count = csv::parse_integer(f[7], ln);
    if (count <= 0) throw Error(ErrorKind::Parse, csv::where(ln) + ": pixel_count must be positive");
    r.pixel_count = std::size_t(count);
    r.calibration_delta_e = csv::parse_finite(f[8], ln);
    r.outlier = csv::parse_integer(f[9], ln) != 0;
    rows.push_back(r);
  }
  return rows;
}

std::vector<RegionColor> load_regions(const std::filesystem::path& path) {
  try {
    return regions_from_csv(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string dataset_to_csv(const std::vector<SampleRow>& rows) {
  std::ostringstream out;
  out << kDatasetHeader << '\n';
  for (const auto& r : rows) {
    check_identifier(r.subject_id);
    check_identifier(r.shade);
    out << r.subject_id << ',' << r.shade;
    for (int k = 0; k < 6; ++k) out << ',' << format_double(r.input(k));
    for (int k = 0; k < 3; ++k) out << ',' << format_double(r.target(k));
    out << '\n';
  }
  return out.str();
}

std::vector<SampleRow> dataset_from_csv(const std::string& text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines[0] != kDatasetHeader) {
    throw Error(ErrorKind::Parse, std::string("dataset: expected header '") + kDatasetHeader + "'");
  }
  std::vector<SampleRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t ln = i + 1;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 11) throw Error(ErrorKind::Parse, csv::where(ln) + ": expected 11 fields");
    SampleRow r;
    r.subject_id = f[0];
    r.shade = f[1];
    for (int k = 0; k < 6; ++k) r.input(k) = csv::parse_finite(f[2 + k], ln);
    for (int k = 0; k < 3; ++k) r.target(k) = csv::parse_finite(f[8 + k], ln);
    rows.push_back(r);
  }
  return rows;
}

void save_dataset(const std::filesystem::path& path, const std::vector<SampleRow>& rows) {
  write_file_atomic(path, dataset_to_csv(rows));
}

std::vector<SampleRow> load_dataset(const std::filesystem::path& path) {
  try {
    return dataset_from_csv(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace shadecal
