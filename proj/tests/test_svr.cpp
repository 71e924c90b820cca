#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "shadecal/error.hpp"
#include "shadecal/rng.hpp"
#include "shadecal/shade_model.hpp"
#include "shadecal/svr.hpp"
#include "shadecal/synth.hpp"

using namespace shadecal;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Problem random_problem(Rng& rng, int n, int d, double noise) {
  Problem p{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  Eigen::VectorXd w(d);
  for (int j = 0; j < d; ++j) w(j) = rng.uniform(-1, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p.x(i, j) = rng.uniform(0, 50) + 10 * j;
    p.y(i) = p.x.row(i).dot(w) * 0.1 + 20 + noise * rng.normal();
  }
  return p;
}

}  // namespace

TEST_SUITE("svr") {

TEST_CASE("dual feasibility and complementary slackness") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Problem p = random_problem(rng, 30 + int(rng.below(30)), 6, rng.uniform(0.05, 2));
    const SvrParams params{rng.uniform(0.1, 5), rng.uniform(0.01, 0.5)};
    const SvrRegressor m = fit_svr(p.x, p.y, params);
    CHECK(m.coefficients.cwiseAbs().maxCoeff() <= params.c + 1e-8);
    CHECK(std::abs(m.coefficients.sum()) <= 1e-8);
    for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
      const double residual = p.y(i) - m.predict(p.x.row(i).transpose());
      if (std::abs(residual) < params.eps - 1e-6) CHECK(std::abs(m.coefficients(i)) <= 1e-6);
      // Outside the tube the box is saturated.
      if (std::abs(residual) > params.eps + 1e-6) CHECK(std::abs(m.coefficients(i)) >= params.c - 1e-6);
    }
    CHECK(m.diagnostics.duality_gap <= 1e-6 * params.c * double(p.x.rows()));
  }
}

TEST_CASE("dual objective matches a brute-force QP at N = 10") {
  Rng rng(2);
  for (int trial = 0; trial < 8; ++trial) {
    const Problem p = random_problem(rng, 10, 6, 1.5);
    const SvrParams params{rng.uniform(0.2, 3), rng.uniform(0.05, 0.3)};
    const SvrRegressor m = fit_svr(p.x, p.y, params);
    const oracle::Matrix k = oracle::standardized_kernel(p.x);
    const std::vector<double> y(p.y.data(), p.y.data() + p.y.size());
    const double best = oracle::svr_dual_optimum(k, y, params.c, params.eps);

    Eigen::MatrixXd kernel(10, 10);
    for (int a = 0; a < 10; ++a) {
      for (int b = 0; b < 10; ++b) kernel(a, b) = double(k[a][b]);
    }
    const double ours = svr_dual_objective(kernel, p.y, m.coefficients, params.eps);
    CHECK(std::abs(ours - best) <= 1e-4);
    CHECK(std::abs(m.diagnostics.dual_objective - best) <= 1e-4);
  }
}

TEST_CASE("tube-feasible data stays in the tube") {
  Rng rng(3);
  const double eps = 0.1;
  const int n = 40;
  Eigen::MatrixXd x(n, 6);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) x(i, j) = rng.uniform(-5, 5);
    y(i) = 0.3 * x(i, 0) - 0.2 * x(i, 3) + 1.5 + rng.uniform(-0.9 * eps, 0.9 * eps);
  }
  const SvrRegressor m = fit_svr(x, y, {1000.0, eps});
  for (int i = 0; i < n; ++i) CHECK(std::abs(m.predict(x.row(i).transpose()) - y(i)) <= eps + 1e-6);
}

TEST_CASE("vanishing box collapses to a constant") {
  Rng rng(4);
  const Problem p = random_problem(rng, 20, 6, 1.0);
  const SvrRegressor m = fit_svr(p.x, p.y, {1e-9, 0.1});
  CHECK(m.coefficients.cwiseAbs().maxCoeff() <= 1e-9);
  const double first = m.predict(p.x.row(0).transpose());
  for (int i = 1; i < 20; ++i) CHECK(std::abs(m.predict(p.x.row(i).transpose()) - first) <= 1e-6);
  CHECK(std::abs(first - m.bias) <= 1e-6);
}

TEST_CASE("identical inputs give the median") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 6, 3.0);
  Eigen::VectorXd y(5);
  y << 4, 1, 9, 2, 7;
  const SvrRegressor m = fit_svr(x, y, {});
  CHECK(m.constant);
  CHECK(m.diagnostics.degenerate);
  CHECK(m.predict(Eigen::VectorXd::Zero(6)) == 4.0);
}

TEST_CASE("parameter validation") {
  Rng rng(5);
  const Problem p = random_problem(rng, 5, 6, 1);
  CHECK_THROWS_AS(fit_svr(p.x.topRows(1), p.y.head(1), {}), Error);
  CHECK_THROWS_AS(fit_svr(p.x, p.y, {0.0, 0.1}), Error);
  CHECK_THROWS_AS(fit_svr(p.x, p.y, {1.0, -0.1}), Error);
}

TEST_CASE("deterministic for a fixed order") {
  Rng rng(6);
  const Problem p = random_problem(rng, 40, 6, 1.0);
  const SvrRegressor a = fit_svr(p.x, p.y, {}), b = fit_svr(p.x, p.y, {});
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.bias == b.bias);
}

TEST_CASE("row order does not move the metrics") {
  SynthDatasetOptions options;
  options.seed = 4;
  const auto rows = synth_prediction_dataset(options).rows;
  const EvalReport base = loocv(rows, ModelKind::Svr);
  Rng rng(7);
  for (int round = 0; round < 3; ++round) {
    auto perm = rows;
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const EvalReport r = loocv(perm, ModelKind::Svr);
    CHECK(std::abs(r.r2 - base.r2) <= 1e-9);
    CHECK(std::abs(r.mse - base.mse) <= 1e-9);
    CHECK(std::abs(r.mae - base.mae) <= 1e-9);
  }
}

TEST_CASE("predict uses the stored standardization") {
  Rng rng(8);
  const Problem p = random_problem(rng, 25, 6, 0.5);
  const SvrRegressor m = fit_svr(p.x, p.y, {});
  const Eigen::VectorXd w = m.weights();
  for (int i = 0; i < 25; ++i) {
    const Eigen::VectorXd z = (p.x.row(i).transpose() - m.mean).cwiseQuotient(m.scale);
    CHECK(m.predict(p.x.row(i).transpose()) == doctest::Approx(z.dot(w) + m.bias).epsilon(1e-12));
  }
}

}
