#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <cmath>

namespace shadecal::detail {

inline constexpr int kRidgeRefinements = 3;

// Ridge-guarded least squares for A x = B.
//
// Columns are scaled to unit norm, lambda = ridge * trace(A'A) / m on the
// scaled system, and (A'A + lambda I) x = A'B is solved through the stacked
// system [A; sqrt(lambda) I] with Householder QR. A few iterated-Tikhonov
// refinement steps x += (A'A + lambda I)^-1 A'(B - A x) then remove the ridge
// bias in well-determined directions while directions with singular values
// far below sqrt(lambda) stay damped.
inline Eigen::MatrixXd ridge_least_squares(Eigen::MatrixXd a, const Eigen::MatrixXd& b, double ridge,
                                           int refinements = kRidgeRefinements) {
  const Eigen::Index n = a.rows(), m = a.cols();
  Eigen::VectorXd scale(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double norm = a.col(j).norm();
    scale(j) = norm > 0 ? norm : 1.0;
    a.col(j) /= scale(j);
  }
  const double lambda = ridge * a.squaredNorm() / double(m);

  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(n + m, m);
  stacked.topRows(n) = a;
  stacked.bottomRows(m).diagonal().setConstant(std::sqrt(lambda));
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + m, b.cols());
  rhs.topRows(n) = b;
  Eigen::MatrixXd x = qr.solve(rhs);
  for (int step = 0; step < refinements; ++step) {
    rhs.topRows(n) = b - a * x;
    x += qr.solve(rhs);
  }
  for (Eigen::Index j = 0; j < m; ++j) x.row(j) /= scale(j);
  return x;
}

}  // namespace shadecal::detail
