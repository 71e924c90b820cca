#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "shadecal/error.hpp"
#include "shadecal/rng.hpp"
#include "shadecal/shade_model.hpp"
#include "shadecal/synth.hpp"

using namespace shadecal;

namespace {

struct Affine {
  Eigen::Matrix<double, 3, 6> w;
  Eigen::Vector3d c;
};

Affine random_affine(Rng& rng) {
  Affine a;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 6; ++j) a.w(i, j) = rng.uniform(-1, 1);
    a.c(i) = rng.uniform(-10, 10);
  }
  return a;
}

std::vector<SampleRow> affine_rows(Rng& rng, int n, const Affine& a, double sigma = 0) {
  std::vector<SampleRow> rows;
  for (int i = 0; i < n; ++i) {
    SampleRow row;
    row.subject_id = "S" + std::to_string(i);
    row.shade = "100";
    row.input << rng.uniform(30, 80), rng.uniform(0, 25), rng.uniform(0, 30), rng.uniform(30, 80), rng.uniform(0, 25),
        rng.uniform(0, 30);
    row.target = a.w * row.input + a.c;
    for (int k = 0; k < 3; ++k) row.target(k) += sigma * rng.normal();
    rows.push_back(row);
  }
  return rows;
}

void to_plain(const std::vector<SampleRow>& rows, std::vector<std::vector<double>>& x, std::vector<std::vector<double>>& y) {
  x.clear();
  y.clear();
  for (const auto& r : rows) {
    x.emplace_back(r.input.data(), r.input.data() + 6);
    y.emplace_back(r.target.data(), r.target.data() + 3);
  }
}

}  // namespace

TEST_SUITE("shade_model") {

TEST_CASE("linear fit recovers an affine map") {
  Rng rng(1);
  const Affine a = random_affine(rng);
  const LinearModel m = fit_linear(affine_rows(rng, 20, a));
  CHECK((m.theta.topRows(6).transpose() - a.w).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((m.theta.row(6).transpose() - a.c).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("constant targets give a bias-only model") {
  Rng rng(2);
  auto rows = affine_rows(rng, 15, random_affine(rng));
  for (auto& r : rows) r.target = Eigen::Vector3d(50, 0, 0);
  const LinearModel m = fit_linear(rows);
  CHECK(m.theta.topRows(6).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((m.theta.row(6).transpose() - Eigen::Vector3d(50, 0, 0)).cwiseAbs().maxCoeff() <= 1e-6);
  SampleInput any;
  any << 1, 2, 3, 4, 5, 6;
  CHECK((m.predict(any) - Eigen::Vector3d(50, 0, 0)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("seven rows interpolate") {
  Rng rng(3);
  auto rows = affine_rows(rng, 7, random_affine(rng));
  for (auto& r : rows) r.target += Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  const LinearModel m = fit_linear(rows);
  for (const auto& r : rows) CHECK((m.predict(r.input) - r.target).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("identity-trained model returns the skin coordinates") {
  Rng rng(4);
  auto rows = affine_rows(rng, 30, random_affine(rng));
  for (auto& r : rows) r.target = r.input.head<3>();
  const ShadeModel m = train(rows, ModelKind::Linear);
  SampleInput x;
  x << 61.5, 12.25, 17.0, 70, 10, 20;
  CHECK((predict(m, x) - x.head<3>()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("empty dataset") {
  CHECK_THROWS_AS(fit_linear(std::vector<SampleRow>{}), Error);
  Rng rng(5);
  const auto two = affine_rows(rng, 2, random_affine(rng));
  try {
    loocv(two, ModelKind::Linear);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("linear fit matches explicit normal equations") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + int(rng.below(43));
    const auto rows = affine_rows(rng, n, random_affine(rng), 2.0);
    std::vector<std::vector<double>> x, y;
    to_plain(rows, x, y);
    const oracle::Matrix b = oracle::fit_affine(x, y);
    const LinearModel m = fit_linear(rows);
    for (int j = 0; j < 7; ++j) {
      for (int k = 0; k < 3; ++k) CHECK(std::abs(m.theta(j, k) - double(b[j][k])) <= 1e-6);
    }
  }
}

TEST_CASE("LOOCV held-out predictions match the oracle on synthetic studies") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SynthDatasetOptions options;
    options.seed = seed;
    const auto rows = synth_prediction_dataset(options).rows;
    REQUIRE(rows.size() == 63);
    std::vector<std::vector<double>> x, y;
    to_plain(rows, x, y);
    const auto held = oracle::loocv_affine(x, y);
    const EvalReport report = loocv(rows, ModelKind::Linear);
    double worst = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(report.predictions(Eigen::Index(i), k) - held[i][k]));
    }
    CHECK(worst <= 1e-6);
    const oracle::Metrics om = oracle::metrics(y, held);
    CHECK(report.r2 == doctest::Approx(om.r2).epsilon(1e-9));
    CHECK(report.mse == doctest::Approx(om.mse).epsilon(1e-9));
    CHECK(report.mae == doctest::Approx(om.mae).epsilon(1e-9));
  }
}

TEST_CASE("noiseless affine data") {
  Rng rng(7);
  const auto rows = affine_rows(rng, 20, random_affine(rng));
  const EvalReport report = loocv(rows, ModelKind::Linear);
  CHECK(report.r2 >= 1 - 1e-9);
  CHECK(report.mse <= 1e-9);

  SynthDatasetOptions options;
  options.mixing.sigma = 0;
  const EvalReport study = loocv(synth_prediction_dataset(options).rows, ModelKind::Linear);
  CHECK(study.r2 >= 1 - 1e-9);
}

TEST_CASE("targets independent of inputs") {
  Rng rng(8);
  auto rows = affine_rows(rng, 40, random_affine(rng));
  for (auto& r : rows) r.target = Eigen::Vector3d(rng.normal(50, 5), rng.normal(10, 3), rng.normal(15, 3));
  const EvalReport linear = loocv(rows, ModelKind::Linear);
  CHECK(linear.r2 <= 0.05);
  const EvalReport mean = loocv(rows, ModelKind::Mean);
  CHECK(mean.r2 <= 0);
}

TEST_CASE("mean predictor is a floor") {
  Rng rng(9);
  const auto rows = affine_rows(rng, 30, random_affine(rng), 1.0);
  const EvalReport report = loocv(rows, ModelKind::Mean);
  CHECK(report.r2 <= 0);
  // Held-out mean of the other rows, computed directly.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j != i) sum += rows[j].target;
    }
    CHECK((report.predictions.row(Eigen::Index(i)).transpose() - sum / double(rows.size() - 1)).norm() <= 1e-9);
  }
}

TEST_CASE("metric identities") {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rows = affine_rows(rng, 25, random_affine(rng), rng.uniform(0.1, 3));
    for (ModelKind kind : {ModelKind::Linear, ModelKind::Svr, ModelKind::Mean}) {
      const EvalReport r = loocv(rows, kind);
      CHECK(r.mse >= 0);
      CHECK(r.mae >= 0);
      CHECK(r.mae <= std::sqrt(r.mse) + 1e-12);
      CHECK(r.r2 == doctest::Approx(r.r2_per_output.mean()));
      CHECK((r.residuals + r.predictions).rows() == 25);
    }
  }
}

TEST_CASE("constant target column") {
  Eigen::MatrixXd t(3, 3), p(3, 3);
  t << 1, 5, 2, 2, 5, 3, 3, 5, 4;
  p = t;
  CHECK(evaluate_predictions(t, p).r2 == 1.0);
  p(0, 1) = 5.5;
  const EvalReport r = evaluate_predictions(t, p);
  CHECK(r.r2_per_output(1) == 0.0);
}

TEST_CASE("threaded folds give the same report") {
  Rng rng(11);
  const auto rows = affine_rows(rng, 30, random_affine(rng), 1.0);
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Svr}) {
    const EvalReport a = loocv(rows, kind, {}, 1), b = loocv(rows, kind, {}, 4);
    CHECK(a.predictions == b.predictions);
    CHECK(a.r2 == b.r2);
  }
}

TEST_CASE("model JSON round-trip") {
  Rng rng(12);
  const auto rows = affine_rows(rng, 20, random_affine(rng), 1.0);
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Svr, ModelKind::Mean}) {
    const ShadeModel m = train(rows, kind, {2.0, 0.05});
    const ShadeModel back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    CHECK(kind_of(back) == kind);
    for (const auto& r : rows) CHECK(predict(back, r.input) == predict(m, r.input));
  }
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"format":"shadecal-model/1","kind":"forest"})")), Error);
}

TEST_CASE("model kind names") {
  CHECK(parse_model_kind("linear") == ModelKind::Linear);
  CHECK(parse_model_kind("svr") == ModelKind::Svr);
  CHECK(parse_model_kind("mean-predictor") == ModelKind::Mean);
  CHECK_THROWS_AS(parse_model_kind("knn"), Error);
}

TEST_CASE("report outputs") {
  Rng rng(13);
  const auto rows = affine_rows(rng, 10, random_affine(rng), 1.0);
  const EvalReport r = loocv(rows, ModelKind::Linear);
  const std::string csv = residuals_csv(r, rows);
  CHECK(csv.rfind("subject_id,shade,res_L,res_a,res_b,delta_e76\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  const auto j = report_to_json(r, rows);
  CHECK(j.at("r2").get<double>() == r.r2);
  CHECK(report_table(r, ModelKind::Linear).find("linear") != std::string::npos);
}

}
