#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadecal/grouping.hpp"
#include "shadecal/image.hpp"

namespace shadecal {

// One annotated rectangle. Chart patches carry a patch_id; swatch and skin
// regions carry a shade and/or role instead.
struct AnnotatedRegion {
  std::optional<int> patch_id;
  std::optional<std::string> shade;
  std::optional<std::string> role;
  Rect rect;
};

struct Annotation {
  std::string image;
  std::vector<AnnotatedRegion> regions;
  std::vector<int> gray_patch_ids = {6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
};

nlohmann::json annotation_to_json(const Annotation& annotation);
Annotation annotation_from_json(const nlohmann::json& j);
Annotation load_annotation(const std::filesystem::path& path);
void save_annotation(const std::filesystem::path& path, const Annotation& annotation);

// Reference table CSV: header `patch_id,X,Y,Z`.
std::map<int, XYZ> load_references(const std::filesystem::path& path);
std::string references_to_csv(const std::map<int, XYZ>& references);

/// Mean device RGB of `rect` over `image`. Throws InvalidInput when the
/// rectangle is empty or leaves the image.
DeviceRGB mean_rgb(const RgbImage& image, const Rect& rect);

/// Pairs each annotated patch (mean over the central half of its rect) with
/// its reference. Throws InvalidInput for a patch without a reference entry.
std::vector<PatchObservation> extract_patches(const RgbImage& image, const Annotation& annotation,
                                              const std::map<int, XYZ>& references);

}  // namespace shadecal
