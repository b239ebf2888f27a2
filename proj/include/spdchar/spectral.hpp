#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "spdchar/raster.hpp"

namespace spdchar {

/// 2D power spectrum |DFT|^2 / (M*N). Storage is in transform order (bin 0 is
/// DC); `at` takes signed frequencies in [-M/2+1, M/2] x [-N/2+1, N/2].
/// With this normalization the bins sum to the sum of squared samples, and
/// white noise of variance s^2 has an expected bin value of s^2.
class Spectrum2D {
public:
  Spectrum2D() = default;
  Spectrum2D(int width, int height, std::vector<double> power);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int u, int v) const noexcept { return power_[index(u, v)]; }
  std::span<const double> data() const noexcept { return power_; }
  std::span<double> data() noexcept { return power_; }

  /// Elementwise accumulate; used to average spectra over replicates.
  Spectrum2D& operator+=(const Spectrum2D& other);
  Spectrum2D& operator*=(double factor);

private:
  std::size_t index(int u, int v) const noexcept {
    const int x = ((u % width_) + width_) % width_;
    const int y = ((v % height_) + height_) % height_;
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> power_;
};

/// DFT(a) * conj(DFT(b)) / (M*N), transform order.
class CrossSpectrum2D {
public:
  CrossSpectrum2D(int width, int height, std::vector<std::complex<double>> values)
      : width_(width), height_(height), values_(std::move(values)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::complex<double> at(int u, int v) const noexcept {
    const int x = ((u % width_) + width_) % width_;
    const int y = ((v % height_) + height_) % height_;
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const std::complex<double>> data() const noexcept { return values_; }

private:
  int width_;
  int height_;
  std::vector<std::complex<double>> values_;
};

/// Unnormalized forward 2D DFT of a real row-major plane.
std::vector<std::complex<double>> dft_2d(std::span<const double> samples, int width, int height);

/// Unnormalized 2D DFT of a complex plane; `inverse` flips the exponent sign
/// (no 1/(M*N) factor is applied).
std::vector<std::complex<double>> dft_2d(std::span<const std::complex<double>> samples,
                                         int width, int height, bool inverse);

Spectrum2D power_spectrum_2d(std::span<const double> samples, int width, int height);
Spectrum2D power_spectrum_2d(const Raster& img);
Spectrum2D power_spectrum_2d(const NoiseImage& img);

CrossSpectrum2D cross_power_spectrum_2d(const Raster& a, const Raster& b);

enum class CurveKind { NPS, MTF, PowerSpectrum };

std::string_view to_string(CurveKind kind);

/// 1D function of radial spatial frequency in cycles/pixel. Bins are uniform
/// from 0 to 0.5; each bin carries a validity flag.
struct Curve {
  CurveKind kind = CurveKind::PowerSpectrum;
  std::vector<double> frequency;
  std::vector<double> value;
  std::vector<std::uint8_t> valid;

  std::size_t size() const noexcept { return value.size(); }
  bool is_valid(std::size_t i) const noexcept { return valid[i] != 0; }
  std::size_t invalid_count() const noexcept;
  bool same_grid(const Curve& other) const noexcept { return frequency == other.frequency; }

  bool operator==(const Curve&) const = default;
};

/// Builds a curve of `bins` bins with frequency k/side and all bins valid.
Curve make_curve(CurveKind kind, int side, std::vector<double> values);

/// Averages a square spectrum over integer-rounded annuli. Bin k holds the mean
/// of all (u, v) with round(r) == k, r = sqrt(u^2 + v^2) <= N/2; frequency k/N.
Curve radial_average(const Spectrum2D& s, CurveKind kind = CurveKind::PowerSpectrum);

inline constexpr int kSmoothingWindow = 7;

/// Centered 7-bin moving average; the window shrinks at the ends.
Curve smooth_curve(const Curve& c);

/// Same moving average applied separately to every run of valid bins. Invalid
/// bins are left untouched and never contribute to a neighbour.
Curve smooth_valid_runs(const Curve& c);

Curve curve_subtract(const Curve& a, const Curve& b);
/// a / b per bin. Bins with b < floor are flagged invalid and set to 0.
Curve curve_ratio(const Curve& a, const Curve& b, double floor);
/// sqrt per bin; negative inputs are rejected.
Curve curve_sqrt(const Curve& c);
Curve curve_scale(const Curve& c, double factor);

/// Cosine edge taper. Each axis ramps as 0.5 - 0.5*cos(pi*d/64) over the first
/// 64 pixels from an edge (d = distance to the edge in pixels); the 2D weight
/// is the minimum of the two axis profiles.
struct WindowMask {
  static constexpr int kTaperLength = 64;
  static constexpr int kMinimumSide = 2 * kTaperLength + 32;

  int width = 0;
  int height = 0;
  double neutral = 0.0;
  std::vector<double> weights;

  double weight(int x, int y) const noexcept {
    return weights[static_cast<std::size_t>(y) * width + x];
  }
  /// Mean of squared weights; the fraction of stationary noise power that
  /// survives the taper.
  double mean_square_weight() const noexcept;
};

double taper_profile(int edge_distance) noexcept;

WindowMask make_window(int width, int height, double neutral);

/// out = neutral + w * (img - neutral), per channel.
Raster apply_window(const Raster& img, const WindowMask& mask);

/// Mean intensity of the `frame`-pixel-wide border of a single-channel image.
double border_mean(const Raster& img, int frame = 8);

/// CSV with header `frequency_cpp,value,valid`.
void write_curve_csv(const Curve& c, std::ostream& out);
void write_curve_csv(const Curve& c, const std::filesystem::path& path);
Curve read_curve_csv(std::istream& in, CurveKind kind);
Curve read_curve_csv(const std::filesystem::path& path, CurveKind kind);

}  // namespace spdchar
