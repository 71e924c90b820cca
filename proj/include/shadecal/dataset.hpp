#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shadecal/color.hpp"
#include "shadecal/image.hpp"
#include "shadecal/skin.hpp"

namespace shadecal {

enum class Role { BareSkin, FoundationSwatch, SkinWithFoundation };

const char* role_name(Role role);
Role parse_role(const std::string& name);

struct RegionColor {
  std::string source_id;
  std::string subject_id;  // empty for swatch images
  Role role = Role::BareSkin;
  std::string shade;  // empty for bare skin
  Lab lab;
  std::size_t pixel_count = 0;
  double calibration_delta_e = 0;  // mean chart ΔE76 of the source image
  bool outlier = false;
};

using SampleInput = Eigen::Matrix<double, 6, 1>;

struct SampleRow {
  std::string subject_id;
  std::string shade;
  SampleInput input;     // bare-skin Lab, foundation Lab
  Eigen::Vector3d target;  // skin-with-foundation Lab
};

struct RegionAverage {
  Lab lab;
  std::size_t pixel_count = 0;
};

/// Converts every region pixel to Lab and averages the Lab values.
/// Throws Domain when the region is empty.
RegionAverage extract_region_color(const XyzImage& image, const SkinMask& region, const WhitePoint& white);
RegionAverage extract_region_color(const XyzImage& image, const Rect& region, const WhitePoint& white);

/// One row per skin-with-foundation region, sorted by (subject, shade).
/// Outlier images are dropped first; a sample whose counterpart exists only
/// as an outlier is dropped silently, a sample with no counterpart at all
/// throws Domain "unpaired sample".
std::vector<SampleRow> assemble_dataset(const std::vector<RegionColor>& regions);

// Replaces any row with the same (source_id, role, shade), else appends.
void upsert_region(std::vector<RegionColor>& rows, const RegionColor& row);

std::string regions_to_csv(const std::vector<RegionColor>& rows);
std::vector<RegionColor> regions_from_csv(const std::string& text);
std::vector<RegionColor> load_regions(const std::filesystem::path& path);

// Dataset CSV: subject_id,shade,skin_L,skin_a,skin_b,fnd_L,fnd_a,fnd_b,out_L,out_a,out_b
std::string dataset_to_csv(const std::vector<SampleRow>& rows);
std::vector<SampleRow> dataset_from_csv(const std::string& text);
void save_dataset(const std::filesystem::path& path, const std::vector<SampleRow>& rows);
std::vector<SampleRow> load_dataset(const std::filesystem::path& path);

}  // namespace shadecal
