#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shadecal/color.hpp"

namespace shadecal {

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  // Central half of the rectangle in each dimension (at least one pixel).
  Rect center_half() const;
  bool operator==(const Rect&) const = default;
};

// Interleaved 8-bit RGB, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);
  RgbImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  DeviceRGB at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {double(data_[i]), double(data_[i + 1]), double(data_[i + 2])};
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t i = index(x, y);
    data_[i] = r;
    data_[i + 1] = g;
    data_[i + 2] = b;
  }
  void fill(Rect rect, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  const std::vector<std::uint8_t>& data() const { return data_; }

 private:
  std::size_t index(int x, int y) const { return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * 3; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

class XyzImage {
 public:
  XyzImage() = default;
  XyzImage(int width, int height) : width_(width), height_(height), data_(std::size_t(width) * height) {}

  int width() const { return width_; }
  int height() const { return height_; }
  const XYZ& at(int x, int y) const { return data_[std::size_t(y) * width_ + x]; }
  XYZ& at(int x, int y) { return data_[std::size_t(y) * width_ + x]; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<XYZ> data_;
};

}  // namespace shadecal
