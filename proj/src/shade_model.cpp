#include "shadecal/shade_model.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"
#include "ridge.hpp"

namespace shadecal {

using nlohmann::json;

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear:
      return "linear";
    case ModelKind::Svr:
      return "svr";
    case ModelKind::Mean:
      return "mean";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "svr") return ModelKind::Svr;
  if (name == "mean" || name == "mean-predictor") return ModelKind::Mean;
  throw Error(ErrorKind::InvalidInput, "unknown model kind '" + name + "'");
}

void split_rows(const std::vector<SampleRow>& rows, Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets) {
  inputs.resize(Eigen::Index(rows.size()), kInputDim);
  targets.resize(Eigen::Index(rows.size()), kOutputDim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inputs.row(Eigen::Index(i)) = rows[i].input.transpose();
    targets.row(Eigen::Index(i)) = rows[i].target.transpose();
  }
}

Eigen::Vector3d LinearModel::predict(const SampleInput& x) const {
  Eigen::Matrix<double, 1, kInputDim + 1> a;
  a << x.transpose(), 1.0;
  return (a * theta).transpose();
}

Eigen::Vector3d SvrModel::predict(const SampleInput& x) const {
  return {outputs[0].predict(x), outputs[1].predict(x), outputs[2].predict(x)};
}

LinearModel fit_linear(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const Eigen::Index n = inputs.rows();
  if (n == 0) throw Error(ErrorKind::Domain, "fit_linear: empty dataset");
  if (inputs.cols() != kInputDim || targets.cols() != kOutputDim || targets.rows() != n) {
    throw Error(ErrorKind::InvalidInput, "fit_linear: expected N x 6 inputs and N x 3 targets");
  }
  constexpr int m = kInputDim + 1;
  Eigen::MatrixXd a(n, m);
  a.leftCols(kInputDim) = inputs;
  a.col(kInputDim).setOnes();
  LinearModel model;
  model.theta = detail::ridge_least_squares(a, targets, kLinearRidge);
  return model;
}

LinearModel fit_linear(const std::vector<SampleRow>& rows) {
  Eigen::MatrixXd x, y;
  split_rows(rows, x, y);
  return fit_linear(x, y);
}

SvrModel fit_svr_model(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const SvrParams& params) {
  SvrModel model;
  for (int k = 0; k < kOutputDim; ++k) model.outputs[k] = fit_svr(inputs, targets.col(k), params);
  return model;
}

SvrModel fit_svr_model(const std::vector<SampleRow>& rows, const SvrParams& params) {
  Eigen::MatrixXd x, y;
  split_rows(rows, x, y);
  return fit_svr_model(x, y, params);
}

MeanModel fit_mean(const Eigen::MatrixXd& targets) {
  if (targets.rows() == 0) throw Error(ErrorKind::Domain, "mean model: empty dataset");
  return {targets.colwise().mean().transpose()};
}

namespace {

ShadeModel train_matrices(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, ModelKind kind, const SvrParams& params) {
  switch (kind) {
    case ModelKind::Linear:
      return fit_linear(x, y);
    case ModelKind::Svr:
      return fit_svr_model(x, y, params);
    case ModelKind::Mean:
      return fit_mean(y);
  }
  throw Error(ErrorKind::InvalidInput, "unknown model kind");
}

}  // namespace

ShadeModel train(const std::vector<SampleRow>& rows, ModelKind kind, const SvrParams& params) {
  Eigen::MatrixXd x, y;
  split_rows(rows, x, y);
  return train_matrices(x, y, kind, params);
}

ModelKind kind_of(const ShadeModel& model) {
  if (std::holds_alternative<LinearModel>(model)) return ModelKind::Linear;
  if (std::holds_alternative<SvrModel>(model)) return ModelKind::Svr;
  return ModelKind::Mean;
}

Eigen::Vector3d predict(const ShadeModel& model, const SampleInput& x) {
  return std::visit([&](const auto& m) -> Eigen::Vector3d { return m.predict(x); }, model);
}

EvalReport evaluate_predictions(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& predictions) {
  EvalReport report;
  report.predictions = predictions;
  report.residuals = targets - predictions;
  const double count = double(targets.size());
  report.mse = report.residuals.squaredNorm() / count;
  report.mae = report.residuals.cwiseAbs().sum() / count;
  for (int k = 0; k < kOutputDim; ++k) {
    const double ss_res = report.residuals.col(k).squaredNorm();
    const double ss_tot = (targets.col(k).array() - targets.col(k).mean()).square().sum();
    // Constant targets: perfect prediction scores 1, anything else 0.
    report.r2_per_output(k) = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  }
  report.r2 = report.r2_per_output.mean();
  return report;
}

EvalReport loocv(const std::vector<SampleRow>& rows, ModelKind kind, const SvrParams& params, unsigned threads) {
  const Eigen::Index n = Eigen::Index(rows.size());
  if (n < 3) throw Error(ErrorKind::Domain, "LOOCV needs at least 3 samples, got " + std::to_string(n));
  Eigen::MatrixXd x, y;
  split_rows(rows, x, y);
  Eigen::MatrixXd predictions(n, kOutputDim);

  auto run_fold = [&](Eigen::Index held) {
    Eigen::MatrixXd xt(n - 1, kInputDim), yt(n - 1, kOutputDim);
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
      if (i == held) continue;
      xt.row(r) = x.row(i);
      yt.row(r) = y.row(i);
      ++r;
    }
    const ShadeModel model = train_matrices(xt, yt, kind, params);
    predictions.row(held) = predict(model, x.row(held).transpose()).transpose();
  };

  threads = std::max(1u, std::min<unsigned>(threads, unsigned(n)));
  if (threads == 1) {
    for (Eigen::Index i = 0; i < n; ++i) run_fold(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (Eigen::Index i = t; i < n; i += threads) run_fold(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return evaluate_predictions(y, predictions);
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(Eigen::Index(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != std::size_t(cols)) throw Error(ErrorKind::Parse, "model: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(Eigen::Index(r), c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

}  // namespace

json model_to_json(const ShadeModel& model) {
  json j{{"format", "shadecal-model/1"}, {"kind", model_kind_name(kind_of(model))}};
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    j["theta"] = matrix_to_json(lin->theta);
  } else if (const auto* svr = std::get_if<SvrModel>(&model)) {
    json outputs = json::array();
    for (const auto& o : svr->outputs) {
      outputs.push_back(json{
          {"mean", vector_to_json(o.mean)},
          {"scale", vector_to_json(o.scale)},
          {"support", matrix_to_json(o.support)},
          {"coefficients", vector_to_json(o.coefficients)},
          {"bias", o.bias},
          {"constant", o.constant},
          {"constant_value", o.constant_value},
          {"duality_gap", o.diagnostics.duality_gap},
      });
    }
    j["outputs"] = outputs;
    j["hyperparameters"] = {{"C", svr->outputs[0].params.c}, {"eps", svr->outputs[0].params.eps}};
  } else {
    j["mean"] = vector_to_json(std::get<MeanModel>(model).mean);
  }
  return j;
}

ShadeModel model_from_json(const json& j) {
  try {
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    if (kind == ModelKind::Linear) {
      LinearModel m;
      const auto theta = matrix_from_json(j.at("theta"), kOutputDim);
      if (theta.rows() != kInputDim + 1) throw Error(ErrorKind::Parse, "model: theta must be 7 x 3");
      m.theta = theta;
      return m;
    }
    if (kind == ModelKind::Svr) {
      SvrModel m;
      const auto& outputs = j.at("outputs");
      if (outputs.size() != kOutputDim) throw Error(ErrorKind::Parse, "model: SVR needs 3 outputs");
      SvrParams params{j.at("hyperparameters").at("C").get<double>(), j.at("hyperparameters").at("eps").get<double>()};
      for (int k = 0; k < kOutputDim; ++k) {
        const auto& o = outputs[k];
        auto& r = m.outputs[k];
        r.params = params;
        r.mean = vector_from_json(o.at("mean"));
        r.scale = vector_from_json(o.at("scale"));
        r.support = matrix_from_json(o.at("support"), kInputDim);
        r.coefficients = vector_from_json(o.at("coefficients"));
        r.bias = o.at("bias").get<double>();
        r.constant = o.at("constant").get<bool>();
        r.constant_value = o.at("constant_value").get<double>();
        r.diagnostics.duality_gap = o.value("duality_gap", 0.0);
        if (r.mean.size() != kInputDim || r.scale.size() != kInputDim || r.coefficients.size() != r.support.rows()) {
          throw Error(ErrorKind::Parse, "model: inconsistent SVR dimensions");
        }
      }
      return m;
    }
    MeanModel m;
    const auto mean = vector_from_json(j.at("mean"));
    if (mean.size() != kOutputDim) throw Error(ErrorKind::Parse, "model: mean needs 3 entries");
    m.mean = mean;
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model: ") + e.what());
  }
}

ShadeModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

json report_to_json(const EvalReport& report, const std::vector<SampleRow>& rows) {
  json folds = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = Eigen::Index(i);
    folds.push_back(json{
        {"subject_id", rows[i].subject_id},
        {"shade", rows[i].shade},
        {"target", vector_to_json(rows[i].target)},
        {"prediction", vector_to_json(report.predictions.row(r).transpose())},
        {"residual", vector_to_json(report.residuals.row(r).transpose())},
    });
  }
  return json{{"r2", report.r2},
              {"mse", report.mse},
              {"mae", report.mae},
              {"r2_per_output", vector_to_json(report.r2_per_output)},
              {"folds", folds}};
}

std::string report_table(const EvalReport& report, ModelKind kind) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "model    R2       MSE      MAE\n";
  out << std::left << std::setw(9) << model_kind_name(kind) << std::setw(9) << report.r2 << std::setw(9) << report.mse
      << report.mae << "\n";
  out << "R2 per output (L, a, b): " << report.r2_per_output(0) << ", " << report.r2_per_output(1) << ", "
      << report.r2_per_output(2) << "\n";
  return out.str();
}

std::string residuals_csv(const EvalReport& report, const std::vector<SampleRow>& rows) {
  std::ostringstream out;
  out << "subject_id,shade,res_L,res_a,res_b,delta_e76\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = report.residuals.row(Eigen::Index(i));
    out << rows[i].subject_id << ',' << rows[i].shade << ',' << format_double(r(0)) << ',' << format_double(r(1)) << ','
        << format_double(r(2)) << ',' << format_double(r.norm()) << '\n';
  }
  return out.str();
}

}  // namespace shadecal
