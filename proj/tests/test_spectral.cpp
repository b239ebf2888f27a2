#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "spdchar/error.hpp"
#include "spdchar/oracles.hpp"
#include "spdchar/spectral.hpp"

using namespace spdchar;

TEST_CASE("power spectrum matches the direct DFT") {
  for (auto [w, h] : {std::pair{8, 8}, std::pair{16, 12}, std::pair{15, 9}}) {
    CAPTURE(w);
    CAPTURE(h);
    const Raster img = testing::random_raster(w, h, 1, 17 + w);
    const Spectrum2D fast = power_spectrum_2d(img);
    const auto slow = oracle::power_spectrum(img.data(), w, h);
    double peak = 0.0;
    for (double v : slow) peak = std::max(peak, v);
    for (std::size_t i = 0; i < slow.size(); ++i) CHECK(std::abs(fast.data()[i] - slow[i]) <= 1e-12 * peak);
  }
}

TEST_CASE("Parseval: bins sum to the sum of squares") {
  const Raster img = testing::random_raster(64, 48, 1, 3, -1.0, 1.0);
  const Spectrum2D s = power_spectrum_2d(img);
  double squares = 0.0;
  for (double v : img.data()) squares += v * v;
  const double total = std::accumulate(s.data().begin(), s.data().end(), 0.0);
  CHECK(total == doctest::Approx(squares).epsilon(1e-12));
}

TEST_CASE("a constant image puts c^2 MN in DC and nothing elsewhere") {
  const Spectrum2D s = power_spectrum_2d(Raster(16, 16, 1, 0.5));
  CHECK(s.at(0, 0) == doctest::Approx(0.25 * 256));
  for (std::size_t i = 1; i < s.data().size(); ++i) CHECK(std::abs(s.data()[i]) < 1e-20);
}

TEST_CASE("a pure cosine lands in its two conjugate bins") {
  const int n = 32;
  const Raster img = testing::cosine_raster(n, 4.0 / n, 0.0, 0.0, 1.0);
  const Spectrum2D s = power_spectrum_2d(img);
  // |X|^2 / (MN) with |X| = MN/2 at +-4.
  CHECK(s.at(4, 0) == doctest::Approx(n * n / 4.0));
  CHECK(s.at(-4, 0) == doctest::Approx(n * n / 4.0));
  CHECK(std::abs(s.at(3, 0)) < 1e-18);
}

TEST_CASE("complex forward then inverse DFT restores the input") {
  const Raster img = testing::random_raster(12, 10, 1, 8);
  std::vector<std::complex<double>> x(img.data().begin(), img.data().end());
  const auto back = dft_2d(dft_2d(x, 12, 10, false), 12, 10, true);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i].real() / 120.0 == doctest::Approx(x[i].real()));
}

TEST_CASE("radial averaging equals direct enumeration") {
  for (int n : {8, 9, 32}) {
    CAPTURE(n);
    Rng rng(n);
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (double& x : v) x = std::floor(rng.uniform(0.0, 100.0));
    const Curve c = radial_average(Spectrum2D(n, n, v));
    const auto ref = oracle::radial_bins(v, n);
    CHECK(c.value == ref.mean);
    REQUIRE(c.size() == static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(c.frequency[k] == double(k) / n);
  }
}

TEST_CASE("radial averaging requires a square spectrum") {
  CHECK_THROWS_AS(radial_average(Spectrum2D(8, 6, std::vector<double>(48))), Error);
}

TEST_CASE("smoothing: constants are fixed, ramps are preserved in the interior") {
  Curve flat = make_curve(CurveKind::NPS, 32, std::vector<double>(17, 2.5));
  for (double v : smooth_curve(flat).value) CHECK(v == doctest::Approx(2.5));
  std::vector<double> ramp(17);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  const Curve s = smooth_curve(make_curve(CurveKind::NPS, 32, ramp));
  for (std::size_t k = 3; k + 3 < s.size(); ++k) CHECK(s.value[k] == doctest::Approx(ramp[k]));
  // Truncated window at the ends.
  CHECK(s.value[0] == doctest::Approx((0 + 1 + 2 + 3) / 4.0));
  CHECK_THROWS_AS(smooth_curve(make_curve(CurveKind::NPS, 8, std::vector<double>(5, 1.0))), Error);
}

TEST_CASE("valid-run smoothing never mixes across invalid bins") {
  Curve c = make_curve(CurveKind::MTF, 64, std::vector<double>(20, 1.0));
  c.value[10] = 1000.0;
  c.valid[10] = 0;
  for (std::size_t k = 11; k < 20; ++k) c.value[k] = 3.0;
  const Curve s = smooth_valid_runs(c);
  for (std::size_t k = 0; k < 10; ++k) CHECK(s.value[k] == doctest::Approx(1.0));
  for (std::size_t k = 11; k < 20; ++k) CHECK(s.value[k] == doctest::Approx(3.0));
  CHECK(s.value[10] == 1000.0);
  CHECK_FALSE(s.is_valid(10));
}

TEST_CASE("curve ratio flags bins under the floor") {
  const Curve a = make_curve(CurveKind::PowerSpectrum, 8, {1.0, 2.0, 3.0, 4.0, 5.0});
  const Curve b = make_curve(CurveKind::PowerSpectrum, 8, {1.0, 1e-9, 2.0, 0.0, 5.0});
  const Curve r = curve_ratio(a, b, 1e-6);
  CHECK(r.value[0] == 1.0);
  CHECK_FALSE(r.is_valid(1));
  CHECK_FALSE(r.is_valid(3));
  CHECK(r.value[2] == 1.5);
  CHECK(r.invalid_count() == 2);
}

TEST_CASE("taper profile and window mask") {
  CHECK(taper_profile(0) == 0.0);
  CHECK(taper_profile(32) == doctest::Approx(0.5));
  CHECK(taper_profile(64) == 1.0);
  CHECK(taper_profile(300) == 1.0);
  for (int d = 0; d < 64; ++d) CHECK(taper_profile(d) < taper_profile(d + 1));

  const WindowMask m = make_window(200, 180, 0.3);
  CHECK(m.weight(100, 90) == 1.0);
  CHECK(m.weight(0, 90) == 0.0);
  CHECK(m.weight(10, 20) == doctest::Approx(std::min(taper_profile(10), taper_profile(20))));
  // Mirror symmetry about the centre.
  CHECK(m.weight(5, 7) == doctest::Approx(m.weight(194, 172)));
  CHECK_THROWS_AS(make_window(159, 200, 0.0), Error);
}

TEST_CASE("windowing a neutral constant leaves it unchanged") {
  const Raster flat(192, 192, 1, 0.42);
  const Raster w = apply_window(flat, make_window(192, 192, 0.42));
  for (double v : w.data()) CHECK(v == doctest::Approx(0.42));
  CHECK(border_mean(flat) == doctest::Approx(0.42));
}

TEST_CASE("curve CSV round trip is lossless") {
  Curve c = make_curve(CurveKind::NPS, 64, {});
  Rng rng(3);
  c = make_curve(CurveKind::NPS, 64, std::vector<double>(33));
  for (double& v : c.value) v = rng.normal() * 1e-5;
  c.valid[7] = 0;
  std::stringstream ss;
  write_curve_csv(c, ss);
  CHECK(ss.str().rfind("frequency_cpp,value,valid\n", 0) == 0);
  const Curve back = read_curve_csv(ss, CurveKind::NPS);
  CHECK(back == c);
}

TEST_CASE("malformed CSV input is rejected") {
  std::stringstream bad("frequency_cpp,value,valid\n0,abc,1\n");
  CHECK_THROWS_AS(read_curve_csv(bad, CurveKind::NPS), Error);
  std::stringstream header("freq,value\n");
  CHECK_THROWS_AS(read_curve_csv(header, CurveKind::NPS), Error);
}
