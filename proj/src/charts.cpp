#include "spdchar/charts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdchar/error.hpp"

namespace spdchar {

void DeadLeavesParams::validate() const {
  if (side < 16) throw Error("invalid_params", "dead leaves side must be at least 16");
  if (!(r_min > 0.0 && r_min < r_max && r_max <= side / 2.0)) {
    throw Error("invalid_params", "dead leaves radii must satisfy 0 < r_min < r_max <= side/2");
  }
  if (!(exponent > 0.0)) throw Error("invalid_params", "radius exponent must be positive");
  if (!(0.0 <= intensity_lo && intensity_lo <= intensity_hi && intensity_hi <= 1.0)) {
    throw Error("invalid_params", "intensity range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw Error("invalid_params", "coverage target must lie in (0, 1]");
  }
}

double radius_cdf(double r, double r_min, double r_max, double exponent) {
  if (r <= r_min) return 0.0;
  if (r >= r_max) return 1.0;
  if (std::abs(exponent - 1.0) < 1e-12) return std::log(r / r_min) / std::log(r_max / r_min);
  const double q = 1.0 - exponent;
  return (std::pow(r, q) - std::pow(r_min, q)) / (std::pow(r_max, q) - std::pow(r_min, q));
}

double sample_radius(Rng& rng, double r_min, double r_max, double exponent) {
  const double u = rng.uniform();
  if (std::abs(exponent - 1.0) < 1e-12) return r_min * std::pow(r_max / r_min, u);
  const double q = 1.0 - exponent;
  const double a = std::pow(r_min, q);
  const double b = std::pow(r_max, q);
  return std::pow(a + u * (b - a), 1.0 / q);
}

std::size_t paint_disk(Raster& img, std::vector<std::uint8_t>& covered, double cx, double cy,
                       double radius, double intensity) {
  const int w = img.width();
  const int h = img.height();
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 0.5)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + radius - 0.5)));
  const double r2 = radius * radius;
  std::size_t fresh = 0;
  for (int y = y0; y <= y1; ++y) {
    const double dy = y + 0.5 - cy;
    const double span2 = r2 - dy * dy;
    if (span2 < 0.0) continue;
    const double half = std::sqrt(span2);
    // Pixel centres x + 0.5 within [cx - half, cx + half].
    const int x0 = std::max(0, static_cast<int>(std::ceil(cx - half - 0.5)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(cx + half - 0.5)));
    for (int x = x0; x <= x1; ++x) {
      img(x, y) = intensity;
      auto& flag = covered[static_cast<std::size_t>(y) * w + x];
      if (!flag) {
        flag = 1;
        ++fresh;
      }
    }
  }
  return fresh;
}

Raster generate_dead_leaves(const DeadLeavesParams& p) {
  p.validate();
  const double mid = 0.5 * (p.intensity_lo + p.intensity_hi);
  Raster img(p.side, p.side, 1, mid);
  std::vector<std::uint8_t> covered(img.plane_size(), 0);
  const auto total = static_cast<double>(img.plane_size());
  const auto target = static_cast<std::size_t>(std::ceil(p.coverage * total));

  Rng rng(p.seed);
  std::size_t covered_count = 0;
  while (covered_count < target) {
    const double radius = sample_radius(rng, p.r_min, p.r_max, p.exponent);
    const double cx = rng.uniform(0.0, p.side);
    const double cy = rng.uniform(0.0, p.side);
    const double intensity = rng.uniform(p.intensity_lo, p.intensity_hi);
    covered_count += paint_disk(img, covered, cx, cy, radius, intensity);
  }
  return img;
}

DeadLeavesParams default_dead_leaves(int side, std::uint64_t seed) {
  DeadLeavesParams p;
  p.side = side;
  p.r_max = side / 4.0;
  p.seed = seed;
  return p;
}

Raster generate_uniform_patch(int side, double level) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw Error("invalid_params", "uniform patch level must lie in [0, 1]");
  }
  if (side < 1) throw Error("invalid_params", "uniform patch side must be positive");
  return Raster(side, side, 1, level);
}

DeadLeavesParams synthetic_scene_params(int side, std::uint64_t seed, int index) {
  const std::uint64_t scene_seed = derive_seed(seed, static_cast<std::uint64_t>(index));
  // Parameter draws come from a sibling stream so the chart stream is untouched.
  Rng draw(derive_seed(scene_seed, 0));
  DeadLeavesParams p;
  p.side = side;
  p.r_min = draw.uniform(1.0, 2.0);
  p.r_max = std::min(side / 2.0, side * draw.uniform(1.0 / 16.0, 1.0 / 4.0));
  p.exponent = draw.uniform(2.7, 3.3);
  const double centre = draw.uniform(0.4, 0.6);
  const double half_range = draw.uniform(0.15, 0.35);
  p.intensity_lo = std::max(0.02, centre - half_range);
  p.intensity_hi = std::min(0.98, centre + half_range);
  p.seed = derive_seed(scene_seed, 1);
  return p;
}

std::vector<Raster> generate_synthetic_scene_set(int count, int side, std::uint64_t seed) {
  if (count < 1) throw Error("invalid_params", "scene count must be at least 1");
  std::vector<Raster> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    scenes.push_back(generate_dead_leaves(synthetic_scene_params(side, seed, i)));
  }
  return scenes;
}

}  // namespace spdchar
