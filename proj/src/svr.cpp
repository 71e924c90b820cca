#include "shadecal/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shadecal/error.hpp"

namespace shadecal {
namespace {

constexpr double kTau = 1e-12;
constexpr long kMaxIterations = 2'000'000;

// Sequential minimal optimization on the 2N-variable form of the dual:
//   min 1/2 a'Qa + p'a,  sum_t s_t a_t = 0,  0 <= a_t <= C
// where t < N carries alpha_i (s = +1, p = eps - y_i) and t >= N carries
// alpha_i* (s = -1, p = eps + y_i), and Q_tu = s_t s_u K_ij.
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, double c, double eps)
      : k_(kernel), n_(kernel.rows()), c_(c), sign_(2 * n_), p_(2 * n_), alpha_(Eigen::VectorXd::Zero(2 * n_)) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      sign_(i) = 1;
      sign_(i + n_) = -1;
      p_(i) = eps - y(i);
      p_(i + n_) = eps + y(i);
    }
    grad_ = p_;
  }

  // Runs until the maximal KKT violation drops below `tolerance`.
  long run(double tolerance) {
    long it = 0;
    while (it < kMaxIterations) {
      if (it % 1000 == 999) refresh_gradient();
      int i = -1, j = -1;
      if (select_pair(tolerance, i, j)) break;
      update(i, j);
      ++it;
    }
    refresh_gradient();
    return it;
  }

  Eigen::VectorXd coefficients() const { return alpha_.head(n_) - alpha_.tail(n_); }

  double bias() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      const double yg = sign_(t) * grad_(t);
      if (at_upper(t)) {
        if (sign_(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (sign_(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    return -rho;
  }

 private:
  double kij(Eigen::Index t, Eigen::Index u) const { return k_(t % n_, u % n_); }
  double q(Eigen::Index t, Eigen::Index u) const { return sign_(t) * sign_(u) * kij(t, u); }
  bool at_upper(Eigen::Index t) const { return alpha_(t) >= c_; }
  bool at_lower(Eigen::Index t) const { return alpha_(t) <= 0; }

  void refresh_gradient() {
    const Eigen::VectorXd beta = coefficients();
    const Eigen::VectorXd kb = k_ * beta;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) grad_(t) = p_(t) + sign_(t) * kb(t % n_);
  }

  // Second-order working set selection. Returns true when optimal.
  bool select_pair(double tolerance, int& out_i, int& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    int i = -1;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      if (sign_(t) > 0) {
        if (!at_upper(t) && -grad_(t) > gmax) {
          gmax = -grad_(t);
          i = int(t);
        }
      } else if (!at_lower(t) && grad_(t) > gmax) {
        gmax = grad_(t);
        i = int(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    int j = -1;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      double grad_diff = 0;
      if (sign_(t) > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, grad_(t));
        grad_diff = gmax + grad_(t);
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -grad_(t));
        grad_diff = gmax - grad_(t);
      }
      if (i < 0 || grad_diff <= 0) continue;
      double quad = kij(i, i) + kij(t, t) - 2.0 * kij(i, t);
      if (quad <= 0) quad = kTau;
      const double obj = -(grad_diff * grad_diff) / quad;
      if (obj < obj_min) {
        obj_min = obj;
        j = int(t);
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tolerance) return true;
    out_i = i;
    out_j = j;
    return false;
  }

  void update(int i, int j) {
    const double old_i = alpha_(i), old_j = alpha_(j);
    double quad = kij(i, i) + kij(j, j) - 2.0 * kij(i, j);
    if (quad <= 0) quad = kTau;
    double ai = old_i, aj = old_j;
    if (sign_(i) != sign_(j)) {
      const double delta = (-grad_(i) - grad_(j)) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else if (ai < 0) {
        ai = 0; aj = -diff;
      }
      if (diff > 0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else if (aj > c_) {
        aj = c_; ai = c_ + diff;
      }
    } else {
      const double delta = (grad_(i) - grad_(j)) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else if (aj < 0) {
        aj = 0; ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else if (ai < 0) {
        ai = 0; aj = sum;
      }
    }
    alpha_(i) = ai;
    alpha_(j) = aj;
    const double di = ai - old_i, dj = aj - old_j;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) grad_(t) += q(t, i) * di + q(t, j) * dj;
  }

  const Eigen::MatrixXd& k_;
  Eigen::Index n_;
  double c_;
  Eigen::VectorXd sign_, p_, alpha_, grad_;
};

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index n = v.size();
  return n % 2 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

double primal_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double bias,
                        const SvrParams& params) {
  const Eigen::VectorXd w = z.transpose() * beta;
  const Eigen::VectorXd f = (z * w).array() + bias;
  double slack = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) slack += std::max(0.0, std::abs(y(i) - f(i)) - params.eps);
  return 0.5 * w.squaredNorm() + params.c * slack;
}

}  // namespace

double svr_dual_objective(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& coefficients, double eps) {
  return targets.dot(coefficients) - eps * coefficients.lpNorm<1>() - 0.5 * coefficients.dot(kernel * coefficients);
}

double SvrRegressor::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (constant) return constant_value;
  const Eigen::VectorXd zx = (x - mean).cwiseQuotient(scale);
  return coefficients.dot(support * zx) + bias;
}

Eigen::VectorXd SvrRegressor::weights() const { return support.transpose() * coefficients; }

SvrRegressor fit_svr(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const SvrParams& params) {
  const Eigen::Index n = inputs.rows();
  if (n < 2) throw Error(ErrorKind::Domain, "SVR needs at least 2 samples");
  if (targets.size() != n) throw Error(ErrorKind::InvalidInput, "SVR: inputs and targets differ in length");
  if (!(params.c > 0) || !(params.eps >= 0)) throw Error(ErrorKind::Domain, "SVR: need C > 0 and eps >= 0");

  SvrRegressor model;
  model.params = params;
  model.mean = inputs.colwise().mean().transpose();
  model.scale.resize(inputs.cols());
  bool all_constant = true;
  for (Eigen::Index k = 0; k < inputs.cols(); ++k) {
    const double sd = std::sqrt((inputs.col(k).array() - model.mean(k)).square().mean());
    model.scale(k) = sd > 0 ? sd : 1.0;
    if (sd > 0) all_constant = false;
  }
  model.support = (inputs.rowwise() - model.mean.transpose()).array().rowwise() / model.scale.transpose().array();
  model.coefficients = Eigen::VectorXd::Zero(n);

  if (all_constant) {
    model.constant = true;
    model.constant_value = median(targets);
    model.bias = model.constant_value;
    model.diagnostics.degenerate = true;
    return model;
  }

  const Eigen::MatrixXd kernel = model.support * model.support.transpose();
  SmoSolver solver(kernel, targets, params.c, params.eps);

  const double scale = std::max(1.0, targets.cwiseAbs().maxCoeff());
  const double gap_bound = 1e-6 * params.c * double(n);
  long iterations = 0;
  double tolerance = 1e-3 * scale;
  const double tolerance_floor = 1e-11 * scale;
  for (;;) {
    iterations += solver.run(tolerance);
    model.coefficients = solver.coefficients();
    model.bias = solver.bias();
    const double primal = primal_objective(model.support, targets, model.coefficients, model.bias, params);
    const double dual = svr_dual_objective(kernel, targets, model.coefficients, params.eps);
    model.diagnostics = {primal, dual, primal - dual, iterations, false};
    if (tolerance <= tolerance_floor) break;
    tolerance = std::max(tolerance_floor, tolerance * 1e-2);
  }
  if (model.diagnostics.duality_gap > gap_bound) {
    throw Error(ErrorKind::Fit, "SVR: duality gap " + std::to_string(model.diagnostics.duality_gap) + " above bound");
  }
  return model;
}

}  // namespace shadecal
