#include <doctest.h>

#include "oracles.hpp"
#include "shadecal/error.hpp"
#include "shadecal/rng.hpp"
#include "shadecal/skin.hpp"

using namespace shadecal;

namespace {

RgbImage uniform_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage image(w, h);
  image.fill({0, 0, w, h}, r, g, b);
  return image;
}

}  // namespace

TEST_SUITE("skin") {

TEST_CASE("worked pixels") {
  CHECK(is_skin_pixel(DeviceRGB(180, 120, 90)));
  CHECK_FALSE(is_skin_pixel(DeviceRGB(0, 255, 0)));
  CHECK_FALSE(is_skin_pixel(DeviceRGB(120, 120, 120)));

  const auto cs = to_color_spaces(DeviceRGB(180, 120, 90));
  CHECK(cs.cb == doctest::Approx(102.9).epsilon(1e-3));
  CHECK(cs.cr == doctest::Approx(160.4).epsilon(1e-3));
  CHECK(cs.hue == doctest::Approx(20.0));
}

TEST_CASE("hue is in degrees on the hexagon") {
  CHECK(to_color_spaces(DeviceRGB(255, 0, 0)).hue == 0.0);
  CHECK(to_color_spaces(DeviceRGB(0, 255, 0)).hue == doctest::Approx(120.0));
  CHECK(to_color_spaces(DeviceRGB(0, 0, 255)).hue == doctest::Approx(240.0));
  CHECK(to_color_spaces(DeviceRGB(255, 0, 128)).hue == doctest::Approx(360.0 - 60.0 * 128 / 255));
  CHECK(to_color_spaces(DeviceRGB(77, 77, 77)).hue == 0.0);
}

TEST_CASE("agrees with the longhand rules on random pixels") {
  Rng rng(2024);
  int positives = 0;
  for (int i = 0; i < 100000; ++i) {
    const int r = int(rng.below(256)), g = int(rng.below(256)), b = int(rng.below(256));
    const bool expected = oracle::skin(r, g, b);
    positives += expected;
    REQUIRE(is_skin_pixel(DeviceRGB(r, g, b)) == expected);
  }
  CHECK(positives > 100);
}

TEST_CASE("agrees with the longhand rules over a dense grid") {
  for (int r = 96; r < 256; r += 1) {
    for (int g = 0; g < 256; g += 3) {
      for (int b = 0; b < 256; b += 5) REQUIRE(is_skin_pixel(DeviceRGB(r, g, b)) == oracle::skin(r, g, b));
    }
  }
}

TEST_CASE("uniform and checkerboard masks") {
  const RgbImage skin = uniform_image(9, 7, 180, 120, 90);
  CHECK(skin_mask(skin).pixel_count() == 63);
  CHECK(skin_mask(uniform_image(9, 7, 0, 255, 0)).pixel_count() == 0);

  RgbImage board(9, 7);
  std::size_t expected = 0;
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      const bool on = (x + y) % 2 == 0;
      expected += on;
      if (on) board.set(x, y, 180, 120, 90);
      else board.set(x, y, 0, 255, 0);
    }
  }
  const SkinMask mask = skin_mask(board);
  CHECK(mask.pixel_count() == expected);
  CHECK(expected == 32);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) CHECK(mask.at(x, y) == ((x + y) % 2 == 0));
  }
}

TEST_CASE("roi restricts detection") {
  const RgbImage skin = uniform_image(10, 10, 180, 120, 90);
  const SkinMask mask = skin_mask(skin, Rect{2, 3, 4, 5});
  CHECK(mask.width() == 10);
  CHECK(mask.pixel_count() == 20);
  CHECK(mask.at(2, 3));
  CHECK_FALSE(mask.at(1, 3));
}

TEST_CASE("empty image is invalid input") {
  try {
    skin_mask(RgbImage{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("mask is a pixelwise map") {
  Rng rng(8);
  const int w = 13, h = 11;
  RgbImage image(w, h), flipped(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto r = std::uint8_t(rng.below(256)), g = std::uint8_t(rng.below(256)), b = std::uint8_t(rng.below(256));
      image.set(x, y, r, g, b);
      flipped.set(x, h - 1 - y, r, g, b);
    }
  }
  const SkinMask a = skin_mask(image), b = skin_mask(flipped);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) CHECK(a.at(x, y) == b.at(x, h - 1 - y));
  }
}

TEST_CASE("mask mean") {
  const RgbImage flat = uniform_image(4, 4, 31, 62, 93);
  SkinMask some(4, 4);
  some.set(1, 2, true);
  some.set(3, 0, true);
  CHECK(mask_mean_rgb(flat, some).vec() == DeviceRGB(31, 62, 93).vec());

  RgbImage two(2, 1);
  two.set(0, 0, 0, 0, 0);
  two.set(1, 0, 255, 255, 255);
  SkinMask both(2, 1);
  both.set(0, 0, true);
  both.set(1, 0, true);
  CHECK(mask_mean_rgb(two, both).vec() == DeviceRGB(127.5, 127.5, 127.5).vec());
}

TEST_CASE("mask mean matches naive accumulation") {
  Rng rng(77);
  const int w = 37, h = 29;
  RgbImage image(w, h);
  SkinMask mask(w, h);
  long double sum[3] = {0, 0, 0};
  long count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int v[3] = {int(rng.below(256)), int(rng.below(256)), int(rng.below(256))};
      image.set(x, y, std::uint8_t(v[0]), std::uint8_t(v[1]), std::uint8_t(v[2]));
      if (rng.uniform() < 0.4) {
        mask.set(x, y, true);
        for (int c = 0; c < 3; ++c) sum[c] += v[c];
        ++count;
      }
    }
  }
  const DeviceRGB mean = mask_mean_rgb(image, mask);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(mean(c) - double(sum[c] / count)) <= 1e-9);
}

TEST_CASE("empty mask reports no skin") {
  const RgbImage flat = uniform_image(3, 3, 10, 10, 10);
  try {
    mask_mean_rgb(flat, SkinMask(3, 3));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
    CHECK(std::string(e.what()).find("no skin detected") != std::string::npos);
  }
}

TEST_CASE("mask bookkeeping") {
  SkinMask mask(5, 4);
  mask.set(0, 0, true);
  mask.set(0, 0, true);
  mask.set(4, 3, true);
  CHECK(mask.pixel_count() == 2);
  mask.set(0, 0, false);
  CHECK(mask.pixel_count() == 1);
  const SkinMask rect = SkinMask::from_rect(5, 4, Rect{1, 1, 3, 2});
  CHECK(rect.pixel_count() == 6);
}

}
