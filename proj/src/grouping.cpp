#include "shadecal/grouping.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "shadecal/error.hpp"

namespace shadecal {
namespace {

double squared_distance(const DeviceRGB& a, const DeviceRGB& b) { return (a.vec() - b.vec()).squaredNorm(); }

std::vector<std::size_t> farthest_first_seeds(const std::vector<DeviceRGB>& points, int k) {
  std::vector<std::size_t> seeds;
  if (k == 1) return {0};
  double best = -1;
  std::size_t si = 0, sj = 1;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = squared_distance(points[i], points[j]);
      if (d > best) {
        best = d;
        si = i;
        sj = j;
      }
    }
  }
  seeds = {si, sj};
  while (int(seeds.size()) < k) {
    double far = -1;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::find(seeds.begin(), seeds.end(), i) != seeds.end()) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (auto s : seeds) nearest = std::min(nearest, squared_distance(points[i], points[s]));
      if (nearest > far) {
        far = nearest;
        pick = i;
      }
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace

int GroupAssignment::set_size(int set) const {
  return int(std::count_if(membership.begin(), membership.end(), [set](const auto& kv) { return kv.second == set; }));
}

KMeansResult kmeans(const std::vector<DeviceRGB>& points, int k, int max_iterations) {
  if (k < 1 || points.size() < std::size_t(k)) {
    throw Error(ErrorKind::Domain, "kmeans: need at least k points");
  }
  KMeansResult result;
  for (auto s : farthest_first_seeds(points, k)) result.centroids.push_back(points[s]);
  result.labels.assign(points.size(), -1);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int label = 0;
      double best = squared_distance(points[i], result.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], result.centroids[c]);
        if (d < best) {
          best = d;
          label = c;
        }
      }
      if (label != result.labels[i]) {
        result.labels[i] = label;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      int count = 0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (result.labels[i] == c) {
          sum += points[i];
          ++count;
        }
      }
      // An emptied cluster keeps its previous centroid.
      if (count > 0) result.centroids[c] = DeviceRGB(sum / double(count));
    }
  }
  return result;
}

GroupAssignment group_patches(const std::vector<PatchObservation>& patches, const std::optional<DeviceRGB>& skin_centroid) {
  if (patches.size() < 3) throw Error(ErrorKind::Domain, "grouping needs at least 3 patches");

  std::vector<PatchObservation> sorted = patches;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.patch_id < b.patch_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].patch_id == sorted[i - 1].patch_id) {
      throw Error(ErrorKind::InvalidInput, "duplicate patch id " + std::to_string(sorted[i].patch_id));
    }
  }

  GroupAssignment out;
  if (skin_centroid) {
    std::vector<const PatchObservation*> rest;
    for (const auto& p : sorted) {
      if ((p.mean_rgb.vec() - skin_centroid->vec()).norm() < kSkinSetRadius) {
        out.membership[p.patch_id] = 0;
      } else {
        rest.push_back(&p);
      }
    }
    if (rest.size() >= 3) {
      std::vector<DeviceRGB> points;
      for (const auto* p : rest) points.push_back(p->mean_rgb);
      const auto km = kmeans(points, 2);
      for (std::size_t i = 0; i < rest.size(); ++i) out.membership[rest[i]->patch_id] = 1 + km.labels[i];
      out.centroids = {*skin_centroid, km.centroids[0], km.centroids[1]};
      out.skin_rule = true;
      return out;
    }
    out.membership.clear();
  }

  std::vector<DeviceRGB> points;
  for (const auto& p : sorted) points.push_back(p.mean_rgb);
  const auto km = kmeans(points, kNumSets);
  for (std::size_t i = 0; i < sorted.size(); ++i) out.membership[sorted[i].patch_id] = km.labels[i];
  out.centroids = {km.centroids[0], km.centroids[1], km.centroids[2]};
  out.skin_rule = false;
  return out;
}

int nearest_set(const DeviceRGB& rgb, const std::array<DeviceRGB, kNumSets>& centroids,
                const std::array<bool, kNumSets>& usable) {
  int best_set = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kNumSets; ++s) {
    if (!usable[s]) continue;
    const double d = (rgb.vec() - centroids[s].vec()).squaredNorm();
    if (d < best) {
      best = d;
      best_set = s;
    }
  }
  return best_set;
}

}  // namespace shadecal
