#pragma once

#include <cstdint>
#include <vector>

#include "spdchar/raster.hpp"
#include "spdchar/rng.hpp"

namespace spdchar {

struct DeadLeavesParams {
  int side = 512;
  double r_min = 1.0;
  double r_max = 128.0;
  /// Radius density is proportional to r^-exponent on [r_min, r_max].
  double exponent = 3.0;
  double intensity_lo = 0.15;
  double intensity_hi = 0.85;
  /// Drawing stops once this fraction of pixels has been covered.
  double coverage = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws a radius from the truncated power-law density using inverse-CDF
/// sampling.
double sample_radius(Rng& rng, double r_min, double r_max, double exponent);

/// Analytic CDF of the truncated power-law radius density.
double radius_cdf(double r, double r_min, double r_max, double exponent);

/// Paints one disk into `img`: pixel (x, y) is covered when its centre
/// (x + 0.5, y + 0.5) lies within `radius` of (cx, cy). Returns the number of
/// pixels painted that were still marked uncovered in `covered` (which is
/// updated).
std::size_t paint_disk(Raster& img, std::vector<std::uint8_t>& covered, double cx, double cy,
                       double radius, double intensity);

/// Dead-leaves occlusion chart. Disks are painted in draw order, each one over
/// the previous ones, until the covered fraction reaches `coverage`; pixels
/// never reached are set to (lo + hi) / 2.
Raster generate_dead_leaves(const DeadLeavesParams& p);

/// Default chart for a given size: r_max scales to side / 4.
DeadLeavesParams default_dead_leaves(int side, std::uint64_t seed);

Raster generate_uniform_patch(int side, double level);

/// `count` dead-leaves scenes with per-scene parameter draws. Scene i uses
/// derive_seed(seed, i), so the first k scenes never depend on `count`.
std::vector<Raster> generate_synthetic_scene_set(int count, int side, std::uint64_t seed);

/// Parameters used for scene `index` of a synthetic set.
DeadLeavesParams synthetic_scene_params(int side, std::uint64_t seed, int index);

}  // namespace spdchar
