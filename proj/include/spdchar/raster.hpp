#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace spdchar {

/// Planar floating-point image with 1 or 3 channels, linear intensity nominally
/// in [0, 1]. Planes are stored contiguously, row-major, channel after channel.
class Raster {
public:
  Raster() = default;
  /// Zero-filled raster.
  Raster(int width, int height, int channels);
  /// Raster filled with `value` in every channel.
  Raster(int width, int height, int channels, double value);
  /// Takes ownership of `data` (size width*height*channels); rejects
  /// non-finite samples.
  Raster(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  double& at(int c, int x, int y) noexcept { return data_[index(c, x, y)]; }
  double at(int c, int x, int y) const noexcept { return data_[index(c, x, y)]; }
  /// Single-channel shorthand.
  double& operator()(int x, int y) noexcept { return data_[index(0, x, y)]; }
  double operator()(int x, int y) const noexcept { return data_[index(0, x, y)]; }

  std::span<double> plane(int c) noexcept {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const noexcept {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Extracts channel `c` as a new single-channel raster.
  Raster channel(int c) const;

  bool operator==(const Raster&) const = default;

private:
  std::size_t index(int c, int x, int y) const noexcept {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Signed noise fluctuation image H = g - mean(g).
struct NoiseImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;
};

// BT.709 luminance weights for linear RGB.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

/// Reads an 8- or 16-bit grayscale or RGB PNG; codes map linearly to [0, 1].
Raster load_png(const std::filesystem::path& path);

/// Writes a PNG at 8 or 16 bits per sample. Codes are round(v * (2^bits - 1))
/// with halves rounded away from zero. Out-of-range samples are rejected.
void save_png(const Raster& r, int bit_depth, const std::filesystem::path& path);

/// Weighted luminance for RGB input; a 1-channel raster is returned as is.
Raster to_luminance(const Raster& r);

/// H = replicate - mean_image, both single-channel and equally sized.
NoiseImage subtract_mean(const Raster& replicate, const Raster& mean_image);

/// Pixelwise arithmetic mean of equally shaped rasters.
Raster mean_image(std::span<const Raster> rasters);

/// Copies a 1-channel raster into three identical channels; 3-channel input is
/// returned unchanged.
Raster to_rgb(const Raster& r);

Raster clamp01(const Raster& r);

/// Throws unless width and height are both at least `min_side`.
void require_min_size(const Raster& r, int min_side, const char* what);

}  // namespace spdchar
