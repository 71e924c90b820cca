#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace shadecal {

// Strongly typed 3-vectors. Each color representation is an Eigen column
// vector with a tag, so expressions work as usual but a Lab can not be passed
// where an XYZ is expected without an explicit conversion.
template <typename Tag, typename Scalar = double>
class Color3 : public Eigen::Matrix<Scalar, 3, 1> {
 public:
  using Base = Eigen::Matrix<Scalar, 3, 1>;

  Color3() : Base(Base::Zero()) {}
  Color3(Scalar c0, Scalar c1, Scalar c2) : Base(c0, c1, c2) {}

  template <typename Derived>
  explicit Color3(const Eigen::MatrixBase<Derived>& other) : Base(other) {}

  template <typename Derived>
  Color3& operator=(const Eigen::MatrixBase<Derived>& other) {
    this->Base::operator=(other);
    return *this;
  }

  const Base& vec() const { return *this; }
  Base& vec() { return *this; }
};

struct DeviceRgbTag {};
struct LinearRgbTag {};
struct XyzTag {};
struct LabTag {};

// Camera-encoded values, nominal range [0, 255].
template <typename Scalar = double>
using BasicDeviceRGB = Color3<DeviceRgbTag, Scalar>;
// Gray-balanced values, luminance scaled (about [0, 100]).
template <typename Scalar = double>
using BasicLinearRGB = Color3<LinearRgbTag, Scalar>;
// CIE tristimulus, Y = 100 for the reference white.
template <typename Scalar = double>
using BasicXYZ = Color3<XyzTag, Scalar>;
// CIE 1976 L*a*b*.
template <typename Scalar = double>
using BasicLab = Color3<LabTag, Scalar>;

using DeviceRGB = BasicDeviceRGB<double>;
using LinearRGB = BasicLinearRGB<double>;
using XYZ = BasicXYZ<double>;
using Lab = BasicLab<double>;

template <typename Scalar = double>
struct BasicWhitePoint {
  Scalar xn = Scalar(96.42);
  Scalar yn = Scalar(100);
  Scalar zn = Scalar(82.52);

  bool valid() const { return xn > 0 && yn > 0 && zn > 0; }
  BasicXYZ<Scalar> xyz() const { return {xn, yn, zn}; }
};

using WhitePoint = BasicWhitePoint<double>;

inline constexpr WhitePoint kD50{96.42, 100.0, 82.52};

// Gain / gamma / offset curve for one channel.
struct ChannelCurve {
  double gain = 1.0;
  double gamma = 1.0;
  double offset = 0.0;
};

inline constexpr double kMinGamma = 0.2;
inline constexpr double kMaxGamma = 5.0;

struct GrayBalanceParams {
  ChannelCurve r, g, b;

  const ChannelCurve& operator[](int channel) const { return channel == 0 ? r : (channel == 1 ? g : b); }
  ChannelCurve& operator[](int channel) { return channel == 0 ? r : (channel == 1 ? g : b); }

  bool valid() const {
    for (int c = 0; c < 3; ++c) {
      const auto& p = (*this)[c];
      if (!(p.gain > 0) || !(p.gamma >= kMinGamma && p.gamma <= kMaxGamma) || !std::isfinite(p.offset)) {
        return false;
      }
    }
    return true;
  }
};

/// Gain-gamma-offset linearization: gain * (v/255)^gamma + offset.
/// Throws std::domain_error for a negative value under a non-integer gamma.
template <typename Scalar>
Scalar linearize(Scalar value, const ChannelCurve& curve) {
  using std::pow;
  const Scalar base = value / Scalar(255);
  if (value < Scalar(0) && std::floor(curve.gamma) != curve.gamma) {
    throw std::domain_error("linearize: negative device value with non-integer gamma");
  }
  return Scalar(curve.gain) * pow(base, Scalar(curve.gamma)) + Scalar(curve.offset);
}

template <typename Scalar>
BasicLinearRGB<Scalar> linearize(const BasicDeviceRGB<Scalar>& rgb, const GrayBalanceParams& params) {
  return {linearize(rgb(0), params.r), linearize(rgb(1), params.g), linearize(rgb(2), params.b)};
}

/// Inverse of the linearization curve: 255 * ((lin - offset)/gain)^(1/gamma).
/// Values below the offset give NaN; callers check gamut first.
template <typename Scalar>
Scalar delinearize(Scalar linear, const ChannelCurve& curve) {
  using std::pow;
  return Scalar(255) * pow((linear - Scalar(curve.offset)) / Scalar(curve.gain), Scalar(1) / Scalar(curve.gamma));
}

namespace detail {

inline constexpr double kLabDelta = 24.0 / 116.0;  // 6/29

template <typename Scalar>
Scalar lab_f(Scalar t) {
  using std::cbrt;
  constexpr double delta = kLabDelta;
  if (t > Scalar(delta * delta * delta)) return cbrt(t);
  return t / Scalar(3 * delta * delta) + Scalar(16.0 / 116.0);
}

template <typename Scalar>
Scalar lab_f_inverse(Scalar f) {
  constexpr double delta = kLabDelta;
  if (f > Scalar(delta)) return f * f * f;
  return Scalar(3 * delta * delta) * (f - Scalar(16.0 / 116.0));
}

}  // namespace detail

/// CIE 1976 L*a*b* relative to `white`. Negative ratios pass through the
/// linear branch of f.
template <typename Scalar>
BasicLab<Scalar> xyz_to_lab(const BasicXYZ<Scalar>& xyz, const BasicWhitePoint<Scalar>& white) {
  const Scalar fx = detail::lab_f(xyz(0) / white.xn);
  const Scalar fy = detail::lab_f(xyz(1) / white.yn);
  const Scalar fz = detail::lab_f(xyz(2) / white.zn);
  return {Scalar(116) * fy - Scalar(16), Scalar(500) * (fx - fy), Scalar(200) * (fy - fz)};
}

template <typename Scalar>
BasicXYZ<Scalar> lab_to_xyz(const BasicLab<Scalar>& lab, const BasicWhitePoint<Scalar>& white) {
  const Scalar fy = (lab(0) + Scalar(16)) / Scalar(116);
  const Scalar fx = fy + lab(1) / Scalar(500);
  const Scalar fz = fy - lab(2) / Scalar(200);
  return {white.xn * detail::lab_f_inverse(fx), white.yn * detail::lab_f_inverse(fy),
          white.zn * detail::lab_f_inverse(fz)};
}

template <typename Scalar>
Scalar delta_e76(const BasicLab<Scalar>& p, const BasicLab<Scalar>& q) {
  return (p.vec() - q.vec()).norm();
}

}  // namespace shadecal
