#include "shadecal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shadecal/error.hpp"
#include "shadecal/gray_balance.hpp"
#include "ridge.hpp"

namespace shadecal {

const char* basis_name(Basis basis) { return basis == Basis::Poly11 ? "poly11" : "affine4"; }

Basis parse_basis(const std::string& name) {
  if (name == "poly11") return Basis::Poly11;
  if (name == "affine4") return Basis::Affine4;
  throw Error(ErrorKind::Parse, "unknown basis tag '" + name + "'");
}

TransformMatrix fit_transform(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets) {
  const Eigen::Index n = features.rows();
  if (n == 0) throw Error(ErrorKind::Domain, "fit_transform: empty patch set");
  if (features.cols() != kNumPolyTerms || targets.cols() != 3 || targets.rows() != n) {
    throw Error(ErrorKind::InvalidInput, "fit_transform: expected N x 11 features and N x 3 targets");
  }

  TransformMatrix out;
  std::vector<int> columns;
  if (n < kNumPolyTerms) {
    out.basis = Basis::Affine4;
    columns = {0, 1, 2, kNumPolyTerms - 1};
  } else {
    out.basis = Basis::Poly11;
    for (int j = 0; j < kNumPolyTerms; ++j) columns.push_back(j);
  }
  const Eigen::Index m = Eigen::Index(columns.size());

  Eigen::MatrixXd q(n, m);
  for (Eigen::Index j = 0; j < m; ++j) q.col(j) = features.col(columns[j]);
  const Eigen::MatrixXd solution = detail::ridge_least_squares(q, targets, kTransformRidge);
  for (Eigen::Index j = 0; j < m; ++j) out.matrix.col(columns[j]) = solution.row(j).transpose();
  if (!out.matrix.allFinite()) throw Error(ErrorKind::Fit, "fit_transform: non-finite solution");
  return out;
}

std::array<bool, kNumSets> CalibrationProfile::usable_sets() const {
  std::array<bool, kNumSets> usable{};
  for (int s = 0; s < kNumSets; ++s) usable[s] = transforms[s].has_value();
  return usable;
}

int CalibrationProfile::classify(const DeviceRGB& rgb) const {
  const int set = nearest_set(rgb, groups.centroids, usable_sets());
  if (set < 0) throw Error(ErrorKind::InvalidInput, "profile has no transforms");
  return set;
}

XYZ CalibrationProfile::calibrate(const DeviceRGB& rgb) const {
  const int set = classify(rgb);
  return transforms[set]->apply(linearize(rgb, gray));
}

CalibrationProfile build_profile(const std::vector<PatchObservation>& chart, const BuildOptions& options) {
  if (chart.empty()) throw Error(ErrorKind::InvalidInput, "build_profile: no patches");
  if (!options.white.valid()) throw Error(ErrorKind::InvalidInput, "white point must be positive");

  std::map<int, const PatchObservation*> by_id;
  for (const auto& p : chart) {
    for (int c = 0; c < 3; ++c) {
      if (!(p.mean_rgb(c) >= 0 && p.mean_rgb(c) <= 255)) {
        throw Error(ErrorKind::InvalidInput, "patch " + std::to_string(p.patch_id) + " has device values outside [0, 255]");
      }
    }
    if (!p.reference_xyz.allFinite()) {
      throw Error(ErrorKind::InvalidInput, "patch " + std::to_string(p.patch_id) + " has a non-finite reference");
    }
    if (!by_id.emplace(p.patch_id, &p).second) {
      throw Error(ErrorKind::InvalidInput, "duplicate patch id " + std::to_string(p.patch_id));
    }
  }

  std::vector<DeviceRGB> gray_device;
  std::vector<double> gray_y;
  for (int id : options.gray_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::InvalidInput, "gray patch " + std::to_string(id) + " not observed");
    gray_device.push_back(it->second->mean_rgb);
    gray_y.push_back(it->second->reference_xyz(1));
  }

  CalibrationProfile profile;
  profile.white = options.white;
  profile.source_id = options.source_id;
  profile.gray = fit_gray_balance(gray_device, gray_y);
  profile.groups = group_patches(chart, options.skin_centroid);

  for (int s = 0; s < kNumSets; ++s) {
    std::vector<const PatchObservation*> members;
    for (const auto& [id, set] : profile.groups.membership) {
      if (set == s) members.push_back(by_id.at(id));
    }
    if (members.empty()) continue;
    Eigen::MatrixXd q(Eigen::Index(members.size()), kNumPolyTerms);
    Eigen::MatrixXd p(Eigen::Index(members.size()), 3);
    for (std::size_t i = 0; i < members.size(); ++i) {
      q.row(Eigen::Index(i)) = polynomial_features(linearize(members[i]->mean_rgb, profile.gray)).transpose();
      p.row(Eigen::Index(i)) = members[i]->reference_xyz.transpose();
    }
    profile.transforms[s] = fit_transform(q, p);
  }

  const auto eval = evaluate_chart(profile, chart);
  profile.diagnostics = eval.per_patch;
  profile.mean_delta_e = eval.mean_delta_e;
  profile.outlier = eval.outlier;
  return profile;
}

XyzImage apply_profile(const RgbImage& image, const CalibrationProfile& profile) {
  XyzImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out.at(x, y) = profile.calibrate(image.at(x, y));
  }
  return out;
}

ChartEvaluation evaluate_chart(const CalibrationProfile& profile, const std::vector<PatchObservation>& chart) {
  if (chart.empty()) throw Error(ErrorKind::InvalidInput, "evaluate_chart: no patches");
  ChartEvaluation eval;
  double sum = 0;
  for (const auto& p : chart) {
    const XYZ calibrated = profile.calibrate(p.mean_rgb);
    const double de = delta_e76(xyz_to_lab(calibrated, profile.white), xyz_to_lab(p.reference_xyz, profile.white));
    eval.calibrated.push_back(calibrated);
    eval.per_patch.push_back({p.patch_id, de});
    sum += de;
  }
  eval.mean_delta_e = sum / double(chart.size());
  eval.outlier = eval.mean_delta_e > kOutlierMeanDeltaE;
  return eval;
}

}  // namespace shadecal
