#pragma once

#include <Eigen/Core>
#include <string>

namespace shadecal {

struct SvrParams {
  double c = 1.0;    // box constraint
  double eps = 0.1;  // tube half-width
};

struct SvrDiagnostics {
  double primal_objective = 0;
  double dual_objective = 0;  // maximized dual value
  double duality_gap = 0;
  long iterations = 0;
  bool degenerate = false;
};

// Linear-kernel epsilon-SVR for one output. Inputs are standardized with the
// training mean and population standard deviation; the kernel is the inner
// product of standardized inputs.
class SvrRegressor {
 public:
  SvrRegressor() = default;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Weight vector in standardized coordinates, sum_i coef_i * z_i.
  Eigen::VectorXd weights() const;

  Eigen::VectorXd mean;         // per feature
  Eigen::VectorXd scale;        // per feature, > 0
  Eigen::MatrixXd support;      // standardized training inputs, N x d
  Eigen::VectorXd coefficients;  // alpha_i - alpha_i*, |.| <= C, sums to 0
  double bias = 0;
  SvrParams params;
  // Degenerate fit (all inputs identical): constant median prediction.
  bool constant = false;
  double constant_value = 0;
  SvrDiagnostics diagnostics;
};

/// Solves the epsilon-SVR dual by SMO with second-order working-set
/// selection until the duality gap is at most 1e-6 * C * N.
/// Throws Domain for N < 2, C <= 0 or eps < 0.
SvrRegressor fit_svr(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const SvrParams& params);

// Dual objective in maximization form:
//   sum_i y_i b_i - eps sum_i |b_i| - 1/2 b' K b
double svr_dual_objective(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& coefficients, double eps);

}  // namespace shadecal
