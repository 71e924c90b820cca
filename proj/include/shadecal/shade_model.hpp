#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shadecal/dataset.hpp"
#include "shadecal/svr.hpp"

namespace shadecal {

inline constexpr int kInputDim = 6;
inline constexpr int kOutputDim = 3;
inline constexpr double kLinearRidge = 1e-10;

// [x, 1] * theta; 6 weight rows and a bias row per output column.
struct LinearModel {
  Eigen::Matrix<double, kInputDim + 1, kOutputDim> theta = decltype(theta)::Zero();

  Eigen::Vector3d predict(const SampleInput& x) const;
};

struct SvrModel {
  std::array<SvrRegressor, kOutputDim> outputs;

  Eigen::Vector3d predict(const SampleInput& x) const;
};

// Training-mean baseline.
struct MeanModel {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();

  Eigen::Vector3d predict(const SampleInput&) const { return mean; }
};

using ShadeModel = std::variant<LinearModel, SvrModel, MeanModel>;

enum class ModelKind { Linear, Svr, Mean };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

void split_rows(const std::vector<SampleRow>& rows, Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets);

/// Ridge-guarded least squares (stacked QR, refined) on the column-equilibrated design
/// [x, 1]. Throws Domain for an empty dataset.
LinearModel fit_linear(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);
LinearModel fit_linear(const std::vector<SampleRow>& rows);

SvrModel fit_svr_model(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const SvrParams& params);
SvrModel fit_svr_model(const std::vector<SampleRow>& rows, const SvrParams& params);

MeanModel fit_mean(const Eigen::MatrixXd& targets);

ShadeModel train(const std::vector<SampleRow>& rows, ModelKind kind, const SvrParams& params = {});
ModelKind kind_of(const ShadeModel& model);
Eigen::Vector3d predict(const ShadeModel& model, const SampleInput& x);

struct EvalReport {
  double r2 = 0;  // per-output pooled R², averaged over the 3 outputs
  double mse = 0;
  double mae = 0;
  Eigen::Vector3d r2_per_output = Eigen::Vector3d::Zero();
  Eigen::MatrixXd predictions;  // N x 3, held-out
  Eigen::MatrixXd residuals;    // N x 3, target - prediction
};

/// Metrics on pooled predictions against targets (both N x 3).
EvalReport evaluate_predictions(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& predictions);

/// Leave-one-out cross-validation. Folds are independent and may run on
/// several threads; the report does not depend on scheduling.
/// Throws Domain for N < 3.
EvalReport loocv(const std::vector<SampleRow>& rows, ModelKind kind, const SvrParams& params = {},
                 unsigned threads = 1);

nlohmann::json model_to_json(const ShadeModel& model);
ShadeModel model_from_json(const nlohmann::json& j);
ShadeModel load_model(const std::filesystem::path& path);

nlohmann::json report_to_json(const EvalReport& report, const std::vector<SampleRow>& rows);
std::string report_table(const EvalReport& report, ModelKind kind);
std::string residuals_csv(const EvalReport& report, const std::vector<SampleRow>& rows);

}  // namespace shadecal
