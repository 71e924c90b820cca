#include "shadecal/gray_balance.hpp"

#include <algorithm>
#include <cmath>

#include "shadecal/error.hpp"

namespace shadecal {
namespace {

// Gain/offset for fixed gamma and the resulting sum of squared residuals.
struct LinearSolve {
  double gain = 0;
  double offset = 0;
  double sse = 0;
};

LinearSolve solve_gain_offset(std::span<const GrayPair> pairs, double gamma) {
  const double n = double(pairs.size());
  double mu = 0, my = 0;
  for (const auto& p : pairs) {
    mu += std::pow(p.device / 255.0, gamma);
    my += p.luminance;
  }
  mu /= n;
  my /= n;
  double suu = 0, suy = 0;
  for (const auto& p : pairs) {
    const double du = std::pow(p.device / 255.0, gamma) - mu;
    suu += du * du;
    suy += du * (p.luminance - my);
  }
  LinearSolve s;
  s.gain = suu > 0 ? suy / suu : 0.0;
  s.offset = my - s.gain * mu;
  for (const auto& p : pairs) {
    const double r = s.gain * std::pow(p.device / 255.0, gamma) + s.offset - p.luminance;
    s.sse += r * r;
  }
  return s;
}

// d(sse)/d(gamma) with gain and offset at their optimum for this gamma.
double sse_slope(std::span<const GrayPair> pairs, double gamma) {
  const auto s = solve_gain_offset(pairs, gamma);
  double slope = 0;
  for (const auto& p : pairs) {
    if (p.device <= 0) continue;
    const double base = p.device / 255.0;
    const double u = std::pow(base, gamma);
    const double r = s.gain * u + s.offset - p.luminance;
    slope += 2.0 * r * s.gain * u * std::log(base);
  }
  return slope;
}

}  // namespace

CurveFit fit_channel_curve(std::span<const GrayPair> pairs) {
  if (pairs.size() < 3) throw Error(ErrorKind::Fit, "gray balance needs at least 3 neutral patches");
  const auto [lo_it, hi_it] = std::minmax_element(pairs.begin(), pairs.end(),
                                                  [](const GrayPair& a, const GrayPair& b) { return a.device < b.device; });
  if (lo_it->device == hi_it->device) throw Error(ErrorKind::Fit, "gray balance: constant device values");
  for (const auto& p : pairs) {
    if (!(p.device >= 0) || !std::isfinite(p.device) || !std::isfinite(p.luminance)) {
      throw Error(ErrorKind::Fit, "gray balance: device values must be finite and nonnegative");
    }
  }

  auto sse = [&](double gamma) { return solve_gain_offset(pairs, gamma).sse; };

  // Coarse scan to bracket the global minimum, then golden section.
  constexpr int kSteps = 48;
  const double step = (kMaxGamma - kMinGamma) / kSteps;
  int best = 0;
  double best_sse = sse(kMinGamma);
  for (int i = 1; i <= kSteps; ++i) {
    const double v = sse(kMinGamma + i * step);
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  double a = kMinGamma + std::max(0, best - 1) * step;
  double b = kMinGamma + std::min(kSteps, best + 1) * step;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sse(c), fd = sse(d);
  while (b - a > kGammaTolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sse(d);
    }
  }
  double gamma = 0.5 * (a + b);
  double gamma_sse = sse(gamma);

  // Polish: root of the analytic slope inside the final bracket. Function
  // values are flat at the optimum, the slope is not.
  double lo = std::max(kMinGamma, a - kGammaTolerance);
  double hi = std::min(kMaxGamma, b + kGammaTolerance);
  double slo = sse_slope(pairs, lo), shi = sse_slope(pairs, hi);
  if (slo < 0 && shi > 0) {
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double sm = sse_slope(pairs, mid);
      if (sm == 0) {
        lo = hi = mid;
        break;
      }
      (sm < 0 ? lo : hi) = mid;
    }
    const double polished = 0.5 * (lo + hi);
    const double polished_sse = sse(polished);
    if (polished_sse <= gamma_sse) {
      gamma = polished;
      gamma_sse = polished_sse;
    }
  }

  const auto solve = solve_gain_offset(pairs, gamma);
  if (!(solve.gain > 0)) throw Error(ErrorKind::Fit, "gray balance: neutral ramp is not increasing");
  return {{solve.gain, gamma, solve.offset}, solve.sse};
}

GrayBalanceParams fit_gray_balance(const std::vector<GrayPair> (&pairs)[3]) {
  GrayBalanceParams params;
  for (int c = 0; c < 3; ++c) params[c] = fit_channel_curve(pairs[c]).curve;
  return params;
}

GrayBalanceParams fit_gray_balance(std::span<const DeviceRGB> device, std::span<const double> luminance) {
  if (device.size() != luminance.size()) throw Error(ErrorKind::Fit, "gray balance: size mismatch");
  std::vector<GrayPair> pairs[3];
  for (std::size_t i = 0; i < device.size(); ++i) {
    for (int c = 0; c < 3; ++c) pairs[c].push_back({device[i](c), luminance[i]});
  }
  return fit_gray_balance(pairs);
}

}  // namespace shadecal
