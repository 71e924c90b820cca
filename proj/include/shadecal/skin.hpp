#pragma once

#include <cstddef>
#include <vector>

#include "shadecal/color.hpp"
#include "shadecal/image.hpp"

namespace shadecal {

// Hue (degrees, hexagonal HSV) and BT.601 full-range chroma of a pixel.
struct PixelColorSpaces {
  DeviceRGB rgb;
  double hue = 0;
  double cb = 128;
  double cr = 128;
};

PixelColorSpaces to_color_spaces(const DeviceRGB& rgb);

/// RGB-H-CbCr rule set: RGB bounds, five Cb/Cr half-planes, hue band.
bool is_skin_pixel(const DeviceRGB& rgb);

class SkinMask {
 public:
  SkinMask() = default;
  SkinMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, false) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return count_; }

  bool at(int x, int y) const { return bits_[std::size_t(y) * width_ + x]; }
  void set(int x, int y, bool value);

  static SkinMask from_rect(int width, int height, const Rect& rect);

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t count_ = 0;
  std::vector<bool> bits_;
};

/// Pixelwise skin classification, no neighbourhood cleanup. `roi`, when
/// nonempty, restricts detection to that rectangle.
SkinMask skin_mask(const RgbImage& image, const Rect& roi = {});

/// Per-channel mean over masked pixels. Throws Domain "no skin detected".
DeviceRGB mask_mean_rgb(const RgbImage& image, const SkinMask& mask);

}  // namespace shadecal
