#include "shadecal/image.hpp"

#include <algorithm>
#include <stdexcept>

namespace shadecal {

Rect Rect::center_half() const {
  const int cw = std::max(1, w / 2);
  const int ch = std::max(1, h / 2);
  return {x + (w - cw) / 2, y + (h - ch) / 2, cw, ch};
}

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height) * 3, 0) {
  if (width < 0 || height < 0) throw std::invalid_argument("RgbImage: negative size");
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), data_(std::move(pixels)) {
  if (data_.size() != std::size_t(width) * std::size_t(height) * 3) {
    throw std::invalid_argument("RgbImage: pixel buffer does not match dimensions");
  }
}

void RgbImage::fill(Rect rect, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = std::max(0, rect.y); y < std::min(height_, rect.y + rect.h); ++y) {
    for (int x = std::max(0, rect.x); x < std::min(width_, rect.x + rect.w); ++x) {
      set(x, y, r, g, b);
    }
  }
}

}  // namespace shadecal
