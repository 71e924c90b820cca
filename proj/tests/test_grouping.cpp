#include <doctest.h>

#include <algorithm>
#include <set>

#include "shadecal/error.hpp"
#include "shadecal/grouping.hpp"
#include "shadecal/rng.hpp"

using namespace shadecal;

namespace {

// Three tight clusters (spread <= 5) far apart (>= 150).
struct Planted {
  std::vector<PatchObservation> patches;
  std::map<int, int> truth;  // patch_id -> cluster
  std::array<DeviceRGB, 3> centers;
};

Planted planted(std::uint64_t seed) {
  Rng rng(seed);
  Planted out;
  out.centers = {DeviceRGB(200, 140, 110), DeviceRGB(40, 40, 60), DeviceRGB(60, 210, 230)};
  for (int id = 1; id <= 35; ++id) {
    const int cluster = (id * 7) % 3;
    DeviceRGB rgb = out.centers[cluster];
    for (int c = 0; c < 3; ++c) rgb(c) += rng.uniform(-1.4, 1.4);
    out.patches.push_back({id, rgb, XYZ(1, 1, 1)});
    out.truth[id] = cluster;
  }
  return out;
}

// Same partition up to relabeling.
bool same_partition(const std::map<int, int>& a, const std::map<int, int>& b) {
  std::map<int, int> relabel;
  for (const auto& [id, la] : a) {
    const int lb = b.at(id);
    const auto [it, inserted] = relabel.emplace(la, lb);
    if (!inserted && it->second != lb) return false;
  }
  std::set<int> targets;
  for (const auto& [la, lb] : relabel) targets.insert(lb);
  return targets.size() == relabel.size();
}

}  // namespace

TEST_SUITE("grouping") {

TEST_CASE("planted clusters with a skin centroid") {
  const Planted p = planted(1);
  const GroupAssignment g = group_patches(p.patches, p.centers[0]);
  CHECK(g.skin_rule);
  CHECK(same_partition(g.membership, p.truth));
  for (const auto& [id, cluster] : p.truth) CHECK((g.membership.at(id) == 0) == (cluster == 0));
  CHECK(g.centroids[0].vec() == p.centers[0].vec());
  for (int s = 0; s < 3; ++s) CHECK(g.set_nonempty(s));
}

TEST_CASE("planted clusters without a skin centroid") {
  const Planted p = planted(2);
  const GroupAssignment g = group_patches(p.patches, std::nullopt);
  CHECK_FALSE(g.skin_rule);
  CHECK(same_partition(g.membership, p.truth));
}

TEST_CASE("set centroids are member means") {
  const Planted p = planted(3);
  const GroupAssignment g = group_patches(p.patches, p.centers[0]);
  for (int s = 1; s < 3; ++s) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int n = 0;
    for (const auto& patch : p.patches) {
      if (g.membership.at(patch.patch_id) == s) {
        sum += patch.mean_rgb;
        ++n;
      }
    }
    CHECK((g.centroids[s].vec() - sum / n).norm() <= 1e-9);
  }
}

TEST_CASE("everything near the skin centroid falls back to 3-means") {
  Rng rng(5);
  std::vector<PatchObservation> patches;
  for (int id = 1; id <= 35; ++id) {
    patches.push_back({id, DeviceRGB(120 + rng.uniform(-20, 20), 100 + rng.uniform(-20, 20), 90 + rng.uniform(-20, 20)),
                       XYZ(1, 1, 1)});
  }
  const GroupAssignment g = group_patches(patches, DeviceRGB(120, 100, 90));
  CHECK_FALSE(g.skin_rule);
  CHECK(g.membership.size() == 35);
  const KMeansResult direct = [&] {
    std::vector<DeviceRGB> points;
    for (const auto& p : patches) points.push_back(p.mean_rgb);
    return kmeans(points, 3);
  }();
  for (std::size_t i = 0; i < patches.size(); ++i) CHECK(g.membership.at(patches[i].patch_id) == direct.labels[i]);
}

TEST_CASE("two remaining patches also fall back") {
  std::vector<PatchObservation> patches;
  for (int id = 1; id <= 6; ++id) patches.push_back({id, DeviceRGB(100 + id, 100, 100), XYZ(1, 1, 1)});
  patches.push_back({7, DeviceRGB(10, 200, 10), XYZ(1, 1, 1)});
  patches.push_back({8, DeviceRGB(10, 10, 220), XYZ(1, 1, 1)});
  const GroupAssignment g = group_patches(patches, DeviceRGB(100, 100, 100));
  CHECK_FALSE(g.skin_rule);
}

TEST_CASE("membership does not depend on patch order") {
  Rng rng(17);
  std::vector<PatchObservation> patches;
  for (int id = 1; id <= 35; ++id) {
    patches.push_back({id, DeviceRGB(rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)), XYZ(1, 1, 1)});
  }
  const DeviceRGB skin(150, 110, 90);
  const GroupAssignment a = group_patches(patches, skin);
  const GroupAssignment a3 = group_patches(patches, std::nullopt);
  for (int round = 0; round < 20; ++round) {
    auto shuffled = patches;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    const GroupAssignment b = group_patches(shuffled, skin);
    CHECK(a.membership == b.membership);
    for (int s = 0; s < 3; ++s) CHECK(a.centroids[s].vec() == b.centroids[s].vec());
    CHECK(group_patches(shuffled, std::nullopt).membership == a3.membership);
  }
}

TEST_CASE("kmeans seeds and ties") {
  // Two identical points: the tie goes to the lower label.
  const std::vector<DeviceRGB> points = {DeviceRGB(0, 0, 0), DeviceRGB(10, 0, 0), DeviceRGB(5, 0, 0)};
  const KMeansResult r = kmeans(points, 2);
  CHECK(r.labels[0] != r.labels[1]);
  CHECK(r.labels[2] == std::min(r.labels[0], r.labels[1]));
  CHECK(r.iterations <= kMaxLloydIterations);
  CHECK_THROWS_AS(kmeans({DeviceRGB(1, 2, 3)}, 2), Error);
}

TEST_CASE("nearest_set breaks ties toward the lower index") {
  const std::array<DeviceRGB, 3> centroids = {DeviceRGB(0, 0, 0), DeviceRGB(10, 0, 0), DeviceRGB(100, 100, 100)};
  CHECK(nearest_set(DeviceRGB(5, 0, 0), centroids, {true, true, true}) == 0);
  CHECK(nearest_set(DeviceRGB(5, 0, 0), centroids, {false, true, true}) == 1);
  CHECK(nearest_set(DeviceRGB(5, 0, 0), centroids, {false, false, false}) == -1);
}

TEST_CASE("too few patches") {
  std::vector<PatchObservation> two = {{1, DeviceRGB(1, 1, 1), XYZ()}, {2, DeviceRGB(9, 9, 9), XYZ()}};
  CHECK_THROWS_AS(group_patches(two, std::nullopt), Error);
}

}
