#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadecal/annotation.hpp"
#include "shadecal/color.hpp"
#include "shadecal/dataset.hpp"
#include "shadecal/grouping.hpp"
#include "shadecal/image.hpp"
#include "shadecal/rng.hpp"

namespace shadecal {

// XYZ -> linear sensor response -> gain/gamma/offset encoding -> noise.
struct ForwardCameraModel {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  GrayBalanceParams encode;
  double noise_sigma = 0;  // device counts
  std::uint64_t seed = 0;

  /// Throws InvalidInput when m is singular or badly conditioned (>= 1e4),
  /// a gain is not positive, a gamma is outside [0.2, 5] or sigma < 0.
  void validate() const;
};

nlohmann::json camera_to_json(const ForwardCameraModel& camera);
ForwardCameraModel camera_from_json(const nlohmann::json& j);

struct CameraDraw {
  double gamma_min = 1.8;
  double gamma_max = 2.4;
  double noise_sigma = 0;
};

/// Random well-conditioned sensor: sRGB primaries mixed by up to 15%
/// crosstalk, a white response of 80-95 with a +-3% per-channel cast,
/// gains 95-110, offsets 0-1.5.
ForwardCameraModel random_camera(std::uint64_t seed, const CameraDraw& draw = {});

struct RenderedPatch {
  DeviceRGB rgb;
  bool out_of_gamut = false;
};

/// device = 255 * ((m*xyz - O)/gain)^(1/gamma) + noise, clamped to [0, 255].
/// Noise is drawn from `rng` only when the camera's sigma is positive.
RenderedPatch render_patch(const XYZ& xyz, const ForwardCameraModel& camera, Rng& rng);
RenderedPatch render_patch(const XYZ& xyz, const ForwardCameraModel& camera);

// 35 references: ids 6-17 are a neutral ramp (Y 3..95 at D50 chromaticity),
// the rest are chromatic points from a fixed Lab list.
std::map<int, XYZ> default_references();
// Lab values behind the chromatic entries of default_references, by patch id.
const std::map<int, Lab>& default_chromatic_lab();

// Fills `rect` with ordered 16x16 Bayer dithering so that any 16-aligned
// sub-block averages to `value` within 1/512 of a count.
void paint_dithered(RgbImage& image, const Rect& rect, const DeviceRGB& value);

inline constexpr int kPatchSize = 64;
inline constexpr int kChartColumns = 7;
inline constexpr int kChartRows = 5;

struct SyntheticChart {
  std::vector<PatchObservation> observations;
  std::map<int, XYZ> references;
  Annotation annotation;
  RgbImage image;
  int out_of_gamut = 0;
};

/// Renders each reference once through the camera (seeded by camera.seed) and
/// lays the patches out on a 7x5 grid of 64-pixel cells. `extra_width` adds
/// blank columns to the right of the chart for subject or swatch regions.
SyntheticChart synth_chart(const std::map<int, XYZ>& references, const ForwardCameraModel& camera,
                           int extra_width = 0);

// y = W x + c + N(0, sigma^2) per component.
struct MixingModel {
  Eigen::Matrix<double, 3, 6> w = Eigen::Matrix<double, 3, 6>::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double sigma = 0;

  static MixingModel default_blend();
};

struct SynthDatasetOptions {
  int n_subjects = 19;
  std::vector<std::string> shades;  // empty = the 30 standard shade codes
  MixingModel mixing = MixingModel::default_blend();
  std::uint64_t seed = 1;
  int target_rows = 63;  // subjects get 3 or 4 shades to reach this
};

struct SyntheticDataset {
  std::vector<SampleRow> rows;
  std::map<std::string, Lab> skins;        // subject -> bare skin
  std::map<std::string, Lab> foundations;  // shade -> swatch
  MixingModel mixing;
};

std::vector<std::string> standard_shades();

SyntheticDataset synth_prediction_dataset(const SynthDatasetOptions& options);

// Writes chart.png, chart.json (annotation), references.csv, camera.json and
// manifest.json into `dir`.
void write_chart_bundle(const std::filesystem::path& dir, const ForwardCameraModel& camera,
                        const std::map<int, XYZ>& references, const nlohmann::json& config);

// Writes one image per bare-skin and skin-with-foundation sample plus a
// swatch image, each with its chart annotation, region annotation and (for
// subject images) a face mask; references.csv; truth.csv with the ideal
// rows; camera.json; and manifest.json listing every image job.
void write_dataset_bundle(const std::filesystem::path& dir, const ForwardCameraModel& camera,
                          const SynthDatasetOptions& options, const nlohmann::json& config);

}  // namespace shadecal
