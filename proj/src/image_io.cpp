#include "shadecal/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "shadecal/error.hpp"

namespace shadecal {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  return f;
}

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

RgbImage load_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorKind::Parse, "png: " + std::string(img.message));
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorKind::Parse, "png: " + std::string(img.message));
  }
  return RgbImage(int(img.width), int(img.height), std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

RgbImage load_jpeg(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> pixels;
  int width = 0, height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw Error(ErrorKind::Parse, std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_stdio_src(&info, file.get());
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  width = int(info.output_width);
  height = int(info.output_height);
  pixels.resize(std::size_t(width) * height * 3);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = pixels.data() + std::size_t(info.output_scanline) * width * 3;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return RgbImage(width, height, std::move(pixels));
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::InvalidInput, "no such file: " + path.string());
  RgbImage image = has_png_signature(path) ? load_png(path) : load_jpeg(path);
  if (image.empty()) throw Error(ErrorKind::InvalidInput, "empty image: " + path.string());
  return image;
}

void save_png(const std::filesystem::path& path, const RgbImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width());
  img.height = png_uint_32(image.height());
  img.format = PNG_FORMAT_RGB;
  const auto tmp = path.string() + ".tmp";
  if (!png_image_write_to_file(&img, tmp.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw Error(ErrorKind::InvalidInput, "png write: " + std::string(img.message));
  }
  std::filesystem::rename(tmp, path);
}

void save_mask_png(const std::filesystem::path& path, const SkinMask& mask) {
  const auto tmp = path.string() + ".tmp";
  {
    FilePtr file = open_file(tmp, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::InvalidInput, "png: cannot allocate writer");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::InvalidInput, "png: write failed for " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, png_uint_32(mask.width()), png_uint_32(mask.height()), 1, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(std::size_t(mask.width() + 7) / 8);
    for (int y = 0; y < mask.height(); ++y) {
      std::fill(row.begin(), row.end(), 0);
      for (int x = 0; x < mask.width(); ++x) {
        if (mask.at(x, y)) row[std::size_t(x) / 8] |= png_byte(0x80u >> (x % 8));
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::filesystem::rename(tmp, path);
}

SkinMask load_mask(const std::filesystem::path& path) {
  const RgbImage image = load_image(path);
  SkinMask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (image.at(x, y)(0) >= 128) mask.set(x, y, true);
    }
  }
  return mask;
}

}  // namespace shadecal
