#include "shadecal/skin.hpp"

#include <algorithm>
#include <cmath>

#include "shadecal/error.hpp"

namespace shadecal {

PixelColorSpaces to_color_spaces(const DeviceRGB& rgb) {
  const double r = rgb(0), g = rgb(1), b = rgb(2);
  PixelColorSpaces out;
  out.rgb = rgb;

  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double d = hi - lo;
  double h = 0;
  if (d > 0) {
    if (hi == r) {
      h = 60.0 * ((g - b) / d);
    } else if (hi == g) {
      h = 60.0 * ((b - r) / d + 2.0);
    } else {
      h = 60.0 * ((r - g) / d + 4.0);
    }
    if (h < 0) h += 360.0;
  }
  out.hue = h;

  out.cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
  out.cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
  return out;
}

bool is_skin_pixel(const DeviceRGB& rgb) {
  const double r = rgb(0), g = rgb(1), b = rgb(2);
  const double spread = std::max({r, g, b}) - std::min({r, g, b});
  const bool rule_rgb = r > 95 && g > 40 && b > 20 && spread > 15 && std::abs(r - g) > 15 && r > g && r > b;
  if (!rule_rgb) return false;

  const auto cs = to_color_spaces(rgb);
  const double cb = cs.cb, cr = cs.cr;
  const bool rule_chroma = cr <= 1.5862 * cb + 20 && cr >= 0.3448 * cb + 76.2069 &&
                           cr >= -4.5652 * cb + 234.5652 && cr <= -1.15 * cb + 301.75 &&
                           cr <= -2.2857 * cb + 432.85;
  if (!rule_chroma) return false;

  return cs.hue < 25 || cs.hue > 230;
}

void SkinMask::set(int x, int y, bool value) {
  auto bit = bits_[std::size_t(y) * width_ + x];
  if (bool(bit) != value) {
    count_ = value ? count_ + 1 : count_ - 1;
    bit = value;
  }
}

SkinMask SkinMask::from_rect(int width, int height, const Rect& rect) {
  SkinMask mask(width, height);
  for (int y = std::max(0, rect.y); y < std::min(height, rect.y + rect.h); ++y) {
    for (int x = std::max(0, rect.x); x < std::min(width, rect.x + rect.w); ++x) {
      mask.set(x, y, true);
    }
  }
  return mask;
}

SkinMask skin_mask(const RgbImage& image, const Rect& roi) {
  if (image.empty()) throw Error(ErrorKind::InvalidInput, "skin_mask: empty image");
  SkinMask mask(image.width(), image.height());
  const Rect area = roi.empty() ? Rect{0, 0, image.width(), image.height()} : roi;
  for (int y = std::max(0, area.y); y < std::min(image.height(), area.y + area.h); ++y) {
    for (int x = std::max(0, area.x); x < std::min(image.width(), area.x + area.w); ++x) {
      if (is_skin_pixel(image.at(x, y))) mask.set(x, y, true);
    }
  }
  return mask;
}

DeviceRGB mask_mean_rgb(const RgbImage& image, const SkinMask& mask) {
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error(ErrorKind::InvalidInput, "mask dimensions do not match the image");
  }
  if (mask.pixel_count() == 0) throw Error(ErrorKind::Domain, "no skin detected");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask.at(x, y)) sum += image.at(x, y);
    }
  }
  return DeviceRGB(sum / double(mask.pixel_count()));
}

}  // namespace shadecal
