// Randomized invariants over many small cases.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "spdchar/filters.hpp"
#include "spdchar/measures.hpp"
#include "spdchar/oracles.hpp"
#include "spdchar/pipeline.hpp"
#include "spdchar/spectral.hpp"

using namespace spdchar;

TEST_CASE("property: Parseval holds for random shapes") {
  Rng rng(100);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 2 + static_cast<int>(rng.uniform() * 40);
    const int h = 2 + static_cast<int>(rng.uniform() * 40);
    const Raster img = testing::random_raster(w, h, 1, rng.next_u64(), -2.0, 2.0);
    double sq = 0.0;
    for (double v : img.data()) sq += v * v;
    const Spectrum2D s = power_spectrum_2d(img);
    CHECK(std::accumulate(s.data().begin(), s.data().end(), 0.0) == doctest::Approx(sq).epsilon(1e-11));
  }
}

TEST_CASE("property: power spectra are even, non-negative and shift-invariant") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + 2 * static_cast<int>(rng.uniform() * 12);
    const Raster img = testing::random_raster(n, n, 1, rng.next_u64());
    const int dx = static_cast<int>(rng.uniform() * n), dy = static_cast<int>(rng.uniform() * n);
    Raster shifted(n, n, 1);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) shifted((x + dx) % n, (y + dy) % n) = img(x, y);
    const Spectrum2D a = power_spectrum_2d(img);
    const Spectrum2D b = power_spectrum_2d(shifted);
    for (int v = -n / 2 + 1; v <= n / 2; ++v)
      for (int u = -n / 2 + 1; u <= n / 2; ++u) {
        CHECK(a.at(u, v) >= 0.0);
        CHECK(a.at(u, v) == doctest::Approx(a.at(-u, -v)).epsilon(1e-9).scale(1.0));
        CHECK(a.at(u, v) == doctest::Approx(b.at(u, v)).epsilon(1e-9).scale(1.0));
      }
  }
}

TEST_CASE("property: radial binning equals the oracle for random sizes") {
  Rng rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform() * 45);
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (double& x : v) x = std::floor(rng.uniform(0.0, 1 << 20));
    CHECK(radial_average(Spectrum2D(n, n, v)).value == oracle::radial_bins(v, n).mean);
  }
}

TEST_CASE("property: guided filter equals the oracle for random parameters") {
  Rng rng(103);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = 6 + static_cast<int>(rng.uniform() * 26);
    const int h = 6 + static_cast<int>(rng.uniform() * 26);
    const int radius = 1 + static_cast<int>(rng.uniform() * 3);
    const double eps = std::pow(10.0, rng.uniform(-4.0, 0.0));
    const Raster img = testing::random_raster(w, h, 1, rng.next_u64());
    const auto fast = guided_filter(img.data(), w, h, radius, eps);
    const auto slow = oracle::guided_filter(img.data(), w, h, radius, eps);
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-9));
  }
}

TEST_CASE("property: ensemble equals the two-pass oracle exactly") {
  Rng rng(104);
  for (int trial = 0; trial < 20; ++trial) {
    const int members = 2 + static_cast<int>(rng.uniform() * 10);
    const int side = 8 + 2 * static_cast<int>(rng.uniform() * 20);
    std::vector<Curve> curves;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < members; ++i) {
      std::vector<double> v(side / 2 + 1);
      for (double& x : v) x = rng.uniform(0.0, 2.0);
      rows.push_back(v);
      curves.push_back(make_curve(CurveKind::MTF, side, v));
    }
    const CurveEnsemble e = ensemble(curves);
    const auto ref = oracle::mean_stddev(rows);
    CHECK(e.mean.value == ref.mean);
    CHECK(e.stddev.value == ref.stddev);
  }
}

TEST_CASE("property: NPS invariant to a constant offset, MTF non-negative") {
  Rng rng(105);
  for (int trial = 0; trial < 5; ++trial) {
    const double offset = std::ldexp(std::floor(rng.uniform(1.0, 64.0)), -6);
    std::vector<Raster> reps, shifted;
    for (int i = 0; i < 4; ++i) {
      Raster r(32, 32, 1);
      for (double& v : r.data()) v = std::ldexp(std::floor(rng.uniform(0.0, 1024.0)), -12);
      Raster s = r;
      for (double& v : s.data()) v += offset;
      reps.push_back(std::move(r));
      shifted.push_back(std::move(s));
    }
    CHECK(spd_nps(make_replicate_set(reps)) == spd_nps(make_replicate_set(shifted)));
  }
  const Raster base = testing::random_raster(160, 160, 1, 7, 0.2, 0.8);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Raster> reps;
    for (int i = 0; i < 3; ++i) reps.push_back(add_dark_noise(base, 1.0, 0.05, rng.next_u64()));
    const ReplicateSet rs = make_replicate_set(std::move(reps));
    const MtfResult m = spd_mtf(base, rs, spd_nps(rs));
    for (double v : m.mtf.value) CHECK(v >= 0.0);
  }
}

TEST_CASE("property: mirror index stays in range and is an involution on valid indices") {
  Rng rng(106);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 30);
    const int i = static_cast<int>(rng.uniform(-100.0, 100.0));
    const int m = mirror_index(i, n);
    CHECK(m >= 0);
    CHECK(m < n);
    CHECK(mirror_index(m, n) == m);
  }
}

TEST_CASE("property: smoothing preserves the mean of interior constants and bounds") {
  Rng rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(7 + static_cast<int>(rng.uniform() * 60));
    for (double& x : v) x = rng.uniform(-1.0, 3.0);
    const Curve s = smooth_curve(make_curve(CurveKind::NPS, 2 * static_cast<int>(v.size()) - 2, v));
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (double x : s.value) {
      CHECK(x >= *lo - 1e-12);
      CHECK(x <= *hi + 1e-12);
    }
  }
}
