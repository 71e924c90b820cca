#pragma once

#include <span>
#include <vector>

#include "shadecal/color.hpp"

namespace shadecal {

// One neutral patch as seen by one channel.
struct GrayPair {
  double device = 0;     // encoded value in [0, 255]
  double luminance = 0;  // reference Y
};

struct CurveFit {
  ChannelCurve curve;
  double sse = 0;  // sum of squared residuals at the optimum
};

inline constexpr double kGammaTolerance = 1e-4;

/// Least-squares gain/gamma/offset for one channel. Gain and offset are the
/// closed-form linear solution for a given gamma; gamma is found by a coarse
/// scan of [0.2, 5] followed by golden-section refinement.
/// Throws Fit when fewer than 3 pairs or all device values are equal.
CurveFit fit_channel_curve(std::span<const GrayPair> pairs);

/// `pairs[c]` holds the neutral patches for channel c.
GrayBalanceParams fit_gray_balance(const std::vector<GrayPair> (&pairs)[3]);

/// Convenience overload: per-patch device RGB and reference Y.
GrayBalanceParams fit_gray_balance(std::span<const DeviceRGB> device, std::span<const double> luminance);

}  // namespace shadecal
