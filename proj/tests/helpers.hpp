#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spdchar/raster.hpp"
#include "spdchar/rng.hpp"

namespace testing {

inline spdchar::Raster random_raster(int w, int h, int channels, std::uint64_t seed,
                                     double lo = 0.0, double hi = 1.0) {
  spdchar::Rng rng(seed);
  spdchar::Raster r(w, h, channels);
  for (double& v : r.data()) v = rng.uniform(lo, hi);
  return r;
}

// mean + amplitude * cos(2 pi (u x + v y)); u, v in cycles/pixel.
inline spdchar::Raster cosine_raster(int n, double u, double v, double mean, double amplitude) {
  spdchar::Raster r(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      r(x, y) = mean + amplitude * std::cos(2.0 * std::numbers::pi * (u * x + v * y));
  return r;
}

inline double mean_of(std::span<const double> d) {
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

inline double variance_of(std::span<const double> d) {
  const double m = mean_of(d);
  double s = 0.0;
  for (double v : d) s += (v - m) * (v - m);
  return s / static_cast<double>(d.size() - 1);
}

// Amplitude of the cosine at frequency (k/n, 0) in the central rows/columns of
// `r`, found by projection over an interior region of whole periods.
inline double cosine_amplitude(const spdchar::Raster& r, int k) {
  const int n = r.width();
  double re = 0.0, im = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double ph = 2.0 * std::numbers::pi * k * x / n;
      re += r(x, y) * std::cos(ph);
      im += r(x, y) * std::sin(ph);
    }
  return 2.0 * std::hypot(re, im) / (static_cast<double>(n) * n);
}

}  // namespace testing
