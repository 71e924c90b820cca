#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "shadecal/color.hpp"
#include "shadecal/rng.hpp"

using namespace shadecal;

namespace {

Lab random_lab(Rng& rng) { return {rng.uniform(0, 100), rng.uniform(-80, 80), rng.uniform(-80, 80)}; }

}  // namespace

TEST_SUITE("color") {

TEST_CASE("linearize examples") {
  CHECK(linearize(0.0, ChannelCurve{3.0, 2.2, 1.25}) == 1.25);
  CHECK(linearize(127.5, ChannelCurve{1, 1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(linearize(255.0, ChannelCurve{95.69, 2.00, 3.48}) == doctest::Approx(99.17).epsilon(1e-12));
}

TEST_CASE("linearize rejects negative values under fractional gamma") {
  CHECK_THROWS_AS(linearize(-1.0, ChannelCurve{1, 2.2, 0}), std::domain_error);
  CHECK(linearize(-255.0, ChannelCurve{1, 2, 0}) == doctest::Approx(1.0));
}

TEST_CASE("linearize is monotone for random valid curves") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ChannelCurve curve{rng.uniform(0.1, 200), rng.uniform(kMinGamma, kMaxGamma), rng.uniform(-10, 10)};
    double previous = linearize(0.0, curve);
    for (int v = 1; v <= 255; ++v) {
      const double current = linearize(double(v), curve);
      REQUIRE(current >= previous);
      previous = current;
    }
  }
}

TEST_CASE("delinearize inverts linearize") {
  const ChannelCurve curve{102.5, 2.3, 0.75};
  for (double v : {1.0, 17.5, 128.0, 254.0}) {
    CHECK(delinearize(linearize(v, curve), curve) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("white maps to L=100 for any white point") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const WhitePoint w{rng.uniform(50, 120), rng.uniform(50, 120), rng.uniform(50, 120)};
    const Lab lab = xyz_to_lab(w.xyz(), w);
    CHECK(std::abs(lab(0) - 100) <= 1e-9);
    CHECK(std::abs(lab(1)) <= 1e-9);
    CHECK(std::abs(lab(2)) <= 1e-9);
  }
}

TEST_CASE("black and mid gray") {
  const Lab black = xyz_to_lab(XYZ(0, 0, 0), kD50);
  CHECK(black.vec().norm() == doctest::Approx(0).scale(1));
  CHECK(black(0) == 0.0);

  const double ratio = 0.1842;
  const Lab gray = xyz_to_lab(XYZ(ratio * kD50.xn, ratio * kD50.yn, ratio * kD50.zn), kD50);
  const double expected = 116.0 * std::pow(ratio, 1.0 / 3.0) - 16.0;
  CHECK(gray(0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(gray(0) - 50.0016) <= 0.01);
  CHECK(std::abs(gray(1)) <= 1e-12);
  CHECK(std::abs(gray(2)) <= 1e-12);
}

TEST_CASE("f is continuous at the branch threshold") {
  const double delta = 24.0 / 116.0;
  const double t = delta * delta * delta;
  const double cube_branch = std::cbrt(t);
  const double linear_branch = t / (3 * delta * delta) + 16.0 / 116.0;
  CHECK(std::abs(cube_branch - linear_branch) <= 1e-9);
  CHECK(std::abs(detail::lab_f(t) - detail::lab_f(std::nextafter(t, 1.0))) <= 1e-9);
}

TEST_CASE("negative ratios take the linear branch") {
  const Lab lab = xyz_to_lab(XYZ(-1, -1, -1), kD50);
  CHECK(lab(0) < 0);
  CHECK(std::isfinite(lab(1)));
}

TEST_CASE("lab_to_xyz inverts xyz_to_lab") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Lab lab = random_lab(rng);
    const Lab back = xyz_to_lab(lab_to_xyz(lab, kD50), kD50);
    CHECK(delta_e76(lab, back) <= 1e-9);
  }
}

TEST_CASE("delta_e76") {
  CHECK(delta_e76(Lab(50, 0, 0), Lab(50, 3, 4)) == 5.0);
  CHECK(delta_e76(Lab(12, -4, 9), Lab(12, -4, 9)) == 0.0);

  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const Lab p = random_lab(rng), q = random_lab(rng), r = random_lab(rng);
    CHECK(delta_e76(p, q) == delta_e76(q, p));
    CHECK(delta_e76(p, r) <= delta_e76(p, q) + delta_e76(q, r) + 1e-12);
    CHECK((delta_e76(p, q) == 0) == (p.vec() == q.vec()));
  }
}

TEST_CASE("conversions work for float scalars") {
  const BasicWhitePoint<float> white{96.42f, 100.f, 82.52f};
  const BasicLab<float> lab = xyz_to_lab(white.xyz(), white);
  CHECK(lab(0) == doctest::Approx(100.f).epsilon(1e-5));
}

}
