#include "shadecal/annotation.hpp"

#include <set>
#include <sstream>

#include "csv.hpp"
#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"

namespace shadecal {

using nlohmann::json;

namespace {

json rect_to_json(const Rect& r) { return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Rect rect_from_json(const json& j) { return {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()}; }

}  // namespace

json annotation_to_json(const Annotation& annotation) {
  json patches = json::array();
  for (const auto& r : annotation.regions) {
    json e;
    if (r.patch_id) e["patch_id"] = *r.patch_id;
    if (r.shade) e["shade"] = *r.shade;
    if (r.role) e["role"] = *r.role;
    e["rect"] = rect_to_json(r.rect);
    patches.push_back(std::move(e));
  }
  return json{{"image", annotation.image}, {"patches", patches}, {"gray_patch_ids", annotation.gray_patch_ids}};
}

Annotation annotation_from_json(const json& j) {
  try {
    Annotation a;
    a.image = j.value("image", std::string());
    for (const auto& e : j.at("patches")) {
      AnnotatedRegion r;
      if (e.contains("patch_id")) r.patch_id = e.at("patch_id").get<int>();
      if (e.contains("shade")) {
        const auto& s = e.at("shade");
        r.shade = s.is_string() ? s.get<std::string>() : std::to_string(s.get<long long>());
      }
      if (e.contains("role")) r.role = e.at("role").get<std::string>();
      r.rect = rect_from_json(e.at("rect"));
      if (r.rect.empty()) throw Error(ErrorKind::Parse, "annotation: empty rectangle");
      a.regions.push_back(r);
    }
    if (j.contains("gray_patch_ids")) a.gray_patch_ids = j.at("gray_patch_ids").get<std::vector<int>>();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("annotation: ") + e.what());
  }
}

Annotation load_annotation(const std::filesystem::path& path) {
  try {
    return annotation_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void save_annotation(const std::filesystem::path& path, const Annotation& annotation) {
  write_file_atomic(path, annotation_to_json(annotation).dump(2) + "\n");
}

std::map<int, XYZ> load_references(const std::filesystem::path& path) {
  const auto lines = csv::split_lines(read_text_file(path));
  if (lines.empty() || lines[0] != "patch_id,X,Y,Z") {
    throw Error(ErrorKind::Parse, path.string() + ": expected header 'patch_id,X,Y,Z'");
  }
  std::map<int, XYZ> refs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 4) throw Error(ErrorKind::Parse, path.string() + ": " + csv::where(i + 1) + ": expected 4 fields");
    const int id = int(csv::parse_integer(f[0], i + 1));
    const XYZ xyz(csv::parse_finite(f[1], i + 1), csv::parse_finite(f[2], i + 1), csv::parse_finite(f[3], i + 1));
    if (!refs.emplace(id, xyz).second) {
      throw Error(ErrorKind::Parse, path.string() + ": " + csv::where(i + 1) + ": duplicate patch id");
    }
  }
  return refs;
}

std::string references_to_csv(const std::map<int, XYZ>& references) {
  std::ostringstream out;
  out << "patch_id,X,Y,Z\n";
  for (const auto& [id, xyz] : references) {
    out << id << ',' << format_double(xyz(0)) << ',' << format_double(xyz(1)) << ',' << format_double(xyz(2)) << '\n';
  }
  return out.str();
}

DeviceRGB mean_rgb(const RgbImage& image, const Rect& rect) {
  if (rect.empty() || rect.x < 0 || rect.y < 0 || rect.x + rect.w > image.width() || rect.y + rect.h > image.height()) {
    throw Error(ErrorKind::InvalidInput, "rectangle outside the image");
  }
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x) sum += image.at(x, y);
  }
  return DeviceRGB(sum / double(rect.w * rect.h));
}

std::vector<PatchObservation> extract_patches(const RgbImage& image, const Annotation& annotation,
                                              const std::map<int, XYZ>& references) {
  std::vector<PatchObservation> out;
  for (const auto& r : annotation.regions) {
    if (!r.patch_id) continue;
    const auto ref = references.find(*r.patch_id);
    if (ref == references.end()) {
      throw Error(ErrorKind::InvalidInput, "patch " + std::to_string(*r.patch_id) + " has no reference entry");
    }
    out.push_back({*r.patch_id, mean_rgb(image, r.rect.center_half()), ref->second});
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "annotation has no chart patches");
  return out;
}

}  // namespace shadecal
