#include "spdchar/oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace spdchar::oracle {

std::vector<double> power_spectrum(std::span<const double> samples, int width, int height) {
  if (samples.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("oracle::power_spectrum: size mismatch");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(samples.size());
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      std::complex<double> acc{0.0, 0.0};
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          // Reduce the phase index exactly before converting to an angle.
          const long cycles_x = (static_cast<long>(u) * x) % width;
          const long cycles_y = (static_cast<long>(v) * y) % height;
          const double phase = -two_pi * (static_cast<double>(cycles_x) / width +
                                          static_cast<double>(cycles_y) / height);
          acc += samples[static_cast<std::size_t>(y) * width + x] *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      out[static_cast<std::size_t>(v) * width + u] = std::norm(acc) / (width * height);
    }
  }
  return out;
}

RadialBins radial_bins(std::span<const double> spectrum, int n) {
  const int half = n / 2;
  RadialBins bins{std::vector<double>(half + 1, 0.0), std::vector<long>(half + 1, 0)};
  for (int y = 0; y < n; ++y) {
    const int fy = std::min(y, n - y);
    for (int x = 0; x < n; ++x) {
      const int fx = std::min(x, n - x);
      const double r = std::hypot(fx, fy);
      if (r > half) continue;
      const int k = static_cast<int>(std::floor(r + 0.5));
      bins.mean[k] += spectrum[static_cast<std::size_t>(y) * n + x];
      ++bins.count[k];
    }
  }
  for (int k = 0; k <= half; ++k) bins.mean[k] /= static_cast<double>(bins.count[k]);
  return bins;
}

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

std::vector<double> guided_filter(std::span<const double> plane, int width, int height,
                                  int radius, double epsilon) {
  const auto sample = [&](int x, int y) {
    return plane[static_cast<std::size_t>(reflect(y, height)) * width + reflect(x, width)];
  };
  const int side = 2 * radius + 1;
  const double count = static_cast<double>(side) * side;

  // Line coefficients of the window centred on every (unreflected) position
  // an output pixel can reach.
  const int ew = width + 2 * radius;
  const int eh = height + 2 * radius;
  std::vector<double> a(static_cast<std::size_t>(ew) * eh);
  std::vector<double> b(a.size());
  for (int cy = -radius; cy < height + radius; ++cy) {
    for (int cx = -radius; cx < width + radius; ++cx) {
      const int rx = reflect(cx, width);
      const int ry = reflect(cy, height);
      double mean = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) mean += sample(rx + dx, ry + dy);
      mean /= count;
      double var = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const double d = sample(rx + dx, ry + dy) - mean;
          var += d * d;
        }
      }
      var /= count;
      const double slope = var / (var + epsilon);
      const std::size_t idx = static_cast<std::size_t>(cy + radius) * ew + (cx + radius);
      a[idx] = slope;
      b[idx] = mean - slope * mean;
    }
  }

  std::vector<double> out(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      const double value = sample(x, y);
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const std::size_t idx =
              static_cast<std::size_t>(y + dy + radius) * ew + (x + dx + radius);
          acc += a[idx] * value + b[idx];
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = acc / count;
    }
  }
  return out;
}

MeanStd mean_stddev(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("oracle::mean_stddev: no rows");
  const std::size_t bins = rows.front().size();
  const double n = static_cast<double>(rows.size());
  MeanStd out{std::vector<double>(bins), std::vector<double>(bins)};
  for (std::size_t k = 0; k < bins; ++k) {
    double sum = 0.0;
    for (const auto& row : rows) sum += row.at(k);
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& row : rows) sq += (row[k] - mean) * (row[k] - mean);
    out.mean[k] = mean;
    out.stddev[k] = std::sqrt(sq / n);
  }
  return out;
}

}  // namespace spdchar::oracle
