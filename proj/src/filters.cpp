#include "spdchar/filters.hpp"

#include <cmath>

#include "spdchar/error.hpp"

namespace spdchar {

int mirror_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw Error("invalid_argument", "gaussian sigma must be >= 0");
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    total += v;
  }
  for (auto& v : k) v /= total;
  return k;
}

std::vector<double> convolve_separable(std::span<const double> plane, int width, int height,
                                       std::span<const double> kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  if (radius == 0) {
    std::vector<double> out(plane.begin(), plane.end());
    for (auto& v : out) v *= kernel[0];
    return out;
  }
  std::vector<double> tmp(plane.size());
  std::vector<double> line(static_cast<std::size_t>(std::max(width, height) + 2 * radius));

  for (int y = 0; y < height; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * width;
    for (int i = -radius; i < width + radius; ++i) line[i + radius] = row[mirror_index(i, width)];
    double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = 0; k < static_cast<int>(kernel.size()); ++k) acc += kernel[k] * line[x + k];
      dst[x] = acc;
    }
  }
  std::vector<double> out(plane.size());
  for (int x = 0; x < width; ++x) {
    for (int i = -radius; i < height + radius; ++i) {
      line[i + radius] = tmp[static_cast<std::size_t>(mirror_index(i, height)) * width + x];
    }
    for (int y = 0; y < height; ++y) {
      double acc = 0.0;
      for (int k = 0; k < static_cast<int>(kernel.size()); ++k) acc += kernel[k] * line[y + k];
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

std::vector<double> box_mean(std::span<const double> plane, int width, int height, int radius) {
  if (radius < 0) throw Error("invalid_argument", "box radius must be >= 0");
  const std::vector<double> box(2 * static_cast<std::size_t>(radius) + 1,
                                1.0 / (2.0 * radius + 1.0));
  return convolve_separable(plane, width, height, box);
}

std::vector<double> guided_filter(std::span<const double> plane, int width, int height,
                                  int radius, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("invalid_argument", "guided filter epsilon must be > 0");
  const std::size_t n = plane.size();
  std::vector<double> squares(n);
  for (std::size_t i = 0; i < n; ++i) squares[i] = plane[i] * plane[i];
  const auto mean = box_mean(plane, width, height, radius);
  const auto mean_sq = box_mean(squares, width, height, radius);

  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double var = mean_sq[i] - mean[i] * mean[i];
    a[i] = var / (var + epsilon);
    b[i] = mean[i] - a[i] * mean[i];
  }
  const auto mean_a = box_mean(a, width, height, radius);
  const auto mean_b = box_mean(b, width, height, radius);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = mean_a[i] * plane[i] + mean_b[i];
  return q;
}

}  // namespace spdchar
