#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shadecal/color.hpp"
#include "shadecal/grouping.hpp"
#include "shadecal/image.hpp"

namespace shadecal {

inline constexpr int kNumPolyTerms = 11;
inline constexpr int kNumAffineTerms = 4;
inline constexpr double kOutlierMeanDeltaE = 3.0;

template <typename Scalar>
using PolyFeatures = Eigen::Matrix<Scalar, kNumPolyTerms, 1>;

/// [R, G, B, R^2, G^2, B^2, RG, GB, RB, RGB, 1]
template <typename Scalar>
PolyFeatures<Scalar> polynomial_features(const BasicLinearRGB<Scalar>& c) {
  const Scalar r = c(0), g = c(1), b = c(2);
  PolyFeatures<Scalar> f;
  f << r, g, b, r * r, g * g, b * b, r * g, g * b, r * b, r * g * b, Scalar(1);
  return f;
}

enum class Basis { Poly11, Affine4 };

const char* basis_name(Basis basis);
Basis parse_basis(const std::string& name);

// Maps polynomial features to XYZ: xyz = matrix * features. An Affine4 fit
// only populates columns R, G, B and the constant.
struct TransformMatrix {
  Eigen::Matrix<double, 3, kNumPolyTerms> matrix = Eigen::Matrix<double, 3, kNumPolyTerms>::Zero();
  Basis basis = Basis::Poly11;

  XYZ apply(const LinearRGB& linear) const { return XYZ(matrix * polynomial_features(linear)); }
};

inline constexpr double kTransformRidge = 1e-8;

/// Ridge-stabilized least squares for Q (N x 11) -> P (N x 3). Uses the
/// reduced [R, G, B, 1] basis when N < 11. Throws Domain when N == 0.
TransformMatrix fit_transform(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets);

struct PatchDiagnostic {
  int patch_id = 0;
  double delta_e = 0;
};

struct CalibrationProfile {
  GrayBalanceParams gray;
  GroupAssignment groups;
  std::array<std::optional<TransformMatrix>, kNumSets> transforms;
  WhitePoint white = kD50;

  // metadata
  std::string source_id;
  std::vector<PatchDiagnostic> diagnostics;
  double mean_delta_e = 0;
  bool outlier = false;

  std::array<bool, kNumSets> usable_sets() const;
  int classify(const DeviceRGB& rgb) const;
  XYZ calibrate(const DeviceRGB& rgb) const;
};

struct BuildOptions {
  std::vector<int> gray_ids = {6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
  std::optional<DeviceRGB> skin_centroid;
  WhitePoint white = kD50;
  std::string source_id;
};

/// Gray balance from the neutral patches, grouping, one transform per
/// nonempty set. Fills the diagnostics with evaluate_chart on the same
/// observations.
CalibrationProfile build_profile(const std::vector<PatchObservation>& chart, const BuildOptions& options);

/// Per pixel: nearest centroid, linearize, polynomial transform. Rows are
/// processed independently; results do not depend on the partitioning.
XyzImage apply_profile(const RgbImage& image, const CalibrationProfile& profile);

struct ChartEvaluation {
  std::vector<PatchDiagnostic> per_patch;
  std::vector<XYZ> calibrated;
  double mean_delta_e = 0;
  bool outlier = false;
};

ChartEvaluation evaluate_chart(const CalibrationProfile& profile, const std::vector<PatchObservation>& chart);

}  // namespace shadecal
