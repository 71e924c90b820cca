#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "shadecal/color.hpp"

namespace shadecal {

inline constexpr int kNumSets = 3;
inline constexpr double kSkinSetRadius = 80.0;
inline constexpr int kMaxLloydIterations = 100;

struct PatchObservation {
  int patch_id = 0;
  DeviceRGB mean_rgb;
  XYZ reference_xyz;
};

struct GroupAssignment {
  std::array<DeviceRGB, kNumSets> centroids;
  // patch_id -> set index in [0, 3)
  std::map<int, int> membership;
  // True when the skin-distance rule was used (false for the all-K-means path).
  bool skin_rule = false;

  int set_size(int set) const;
  bool set_nonempty(int set) const { return set_size(set) > 0; }
};

struct KMeansResult {
  std::vector<DeviceRGB> centroids;
  std::vector<int> labels;  // aligned with the input points
  int iterations = 0;
};

/// Deterministic Lloyd K-means. Seeds are the farthest pair of points (and,
/// for k = 3, the point farthest from both). Ties on distance go to the lower
/// index, so callers wanting order independence pass points in a canonical
/// order. Requires points.size() >= k.
KMeansResult kmeans(const std::vector<DeviceRGB>& points, int k, int max_iterations = kMaxLloydIterations);

/// Three-way patch grouping. With a skin centroid, Set 1 holds patches closer
/// than 80 device counts to it and the rest are split by 2-means; without one
/// (or when fewer than 3 patches remain) all patches go through 3-means.
GroupAssignment group_patches(const std::vector<PatchObservation>& patches, const std::optional<DeviceRGB>& skin_centroid);

/// Nearest centroid among `usable` sets, ties to the lower index.
int nearest_set(const DeviceRGB& rgb, const std::array<DeviceRGB, kNumSets>& centroids,
                const std::array<bool, kNumSets>& usable);

}  // namespace shadecal
