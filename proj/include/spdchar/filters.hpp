#pragma once

#include <span>
#include <vector>

namespace spdchar {

/// Mirror index without edge repetition (... 2 1 | 0 1 2 ... n-1 | n-2 ...).
/// Preserves the parity of the index, so a mirrored CFA site keeps its colour.
int mirror_index(int i, int n) noexcept;

/// Normalized, sampled Gaussian with radius ceil(4 * sigma); sigma == 0 gives
/// the unit impulse.
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution of a row-major plane with a symmetric odd kernel,
/// mirror edge handling.
std::vector<double> convolve_separable(std::span<const double> plane, int width, int height,
                                       std::span<const double> kernel);

/// Mean over (2r+1)^2 box windows, mirror edge handling.
std::vector<double> box_mean(std::span<const double> plane, int width, int height, int radius);

/// Self-guided filter output q (guidance = input) with box radius `radius`
/// and regularizer `epsilon`.
std::vector<double> guided_filter(std::span<const double> plane, int width, int height,
                                  int radius, double epsilon);

}  // namespace spdchar
