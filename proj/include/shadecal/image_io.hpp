#pragma once

#include <filesystem>

#include "shadecal/image.hpp"
#include "shadecal/skin.hpp"

namespace shadecal {

// 8-bit RGB PNG or JPEG, chosen by file signature. Alpha is dropped, gray is
// expanded, 16-bit is reduced to 8. No color management is applied.
RgbImage load_image(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const RgbImage& image);

// 1-bit grayscale PNG, white = true.
void save_mask_png(const std::filesystem::path& path, const SkinMask& mask);
// Any PNG/JPEG; a pixel is set when its first channel is >= 128.
SkinMask load_mask(const std::filesystem::path& path);

}  // namespace shadecal
