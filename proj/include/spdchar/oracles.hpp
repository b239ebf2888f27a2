#pragma once

// Brute-force reference computations. They share no code with the library's
// fast paths and exist only to cross-check them.

#include <span>
#include <vector>

namespace spdchar::oracle {

/// Direct O((MN)^2) DFT; returns |X(u,v)|^2 / (M*N), row-major in transform
/// order (u fastest).
std::vector<double> power_spectrum(std::span<const double> samples, int width, int height);

struct RadialBins {
  std::vector<double> mean;
  std::vector<long> count;
};

/// Walks the transform-order storage of an n x n spectrum, folds each index to
/// its alias magnitude min(i, n - i), and averages into round(r) bins,
/// dropping r > n/2.
RadialBins radial_bins(std::span<const double> spectrum, int n);

/// Self-guided filter evaluated window by window: each window's least-squares
/// line (a, b) is solved from explicitly gathered reflect-101 samples, and each
/// output pixel averages the lines of every window that covers it.
std::vector<double> guided_filter(std::span<const double> plane, int width, int height,
                                  int radius, double epsilon);

struct MeanStd {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Two-pass per-bin mean and population standard deviation of equal-length
/// rows.
MeanStd mean_stddev(const std::vector<std::vector<double>>& rows);

}  // namespace spdchar::oracle
