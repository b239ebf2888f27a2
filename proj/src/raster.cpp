#include "spdchar/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdchar/error.hpp"

namespace spdchar {

namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw Error("invalid_shape", "raster dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw Error("invalid_shape", "raster must have 1 or 3 channels, got " +
                                     std::to_string(channels));
  }
}

}  // namespace

Raster::Raster(int width, int height, int channels)
    : Raster(width, height, channels, 0.0) {}

Raster::Raster(int width, int height, int channels, double value)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  if (!std::isfinite(value)) throw Error("non_finite", "fill value is not finite");
  data_.assign(plane_size() * static_cast<std::size_t>(channels), value);
}

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != plane_size() * static_cast<std::size_t>(channels)) {
    throw Error("invalid_shape", "sample count does not match raster dimensions");
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw Error("non_finite", "raster contains NaN or Inf samples");
  }
}

Raster Raster::channel(int c) const {
  if (c < 0 || c >= channels_) throw Error("invalid_channel", "channel index out of range");
  auto p = plane(c);
  return Raster(width_, height_, 1, std::vector<double>(p.begin(), p.end()));
}

Raster to_luminance(const Raster& r) {
  if (r.channels() == 1) return r;
  Raster out(r.width(), r.height(), 1);
  auto red = r.plane(0);
  auto green = r.plane(1);
  auto blue = r.plane(2);
  auto dst = out.plane(0);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = kLumaR * red[i] + kLumaG * green[i] + kLumaB * blue[i];
  }
  return out;
}

NoiseImage subtract_mean(const Raster& replicate, const Raster& mean) {
  if (replicate.channels() != 1 || mean.channels() != 1) {
    throw Error("invalid_shape", "subtract_mean expects single-channel rasters");
  }
  if (!replicate.same_shape(mean)) {
    throw Error("dimension_mismatch", "replicate and mean image differ in size");
  }
  NoiseImage h{replicate.width(), replicate.height(), {}};
  h.data.resize(replicate.plane_size());
  auto g = replicate.plane(0);
  auto gbar = mean.plane(0);
  for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] = g[i] - gbar[i];
  return h;
}

Raster mean_image(std::span<const Raster> rasters) {
  if (rasters.empty()) throw Error("empty_input", "mean_image needs at least one raster");
  Raster out(rasters.front().width(), rasters.front().height(), rasters.front().channels());
  for (const auto& r : rasters) {
    if (!r.same_shape(out)) throw Error("dimension_mismatch", "rasters differ in shape");
  }
  // Extended-precision sum: n identical doubles sum exactly, so the mean of
  // identical replicates is the replicate itself.
  auto dst = out.data();
  const long double n = static_cast<long double>(rasters.size());
  for (std::size_t i = 0; i < dst.size(); ++i) {
    long double sum = 0.0L;
    for (const auto& r : rasters) sum += r.data()[i];
    dst[i] = static_cast<double>(sum / n);
  }
  return out;
}

Raster to_rgb(const Raster& r) {
  if (r.channels() == 3) return r;
  std::vector<double> data;
  data.reserve(r.plane_size() * 3);
  for (int c = 0; c < 3; ++c) data.insert(data.end(), r.data().begin(), r.data().end());
  return Raster(r.width(), r.height(), 3, std::move(data));
}

Raster clamp01(const Raster& r) {
  Raster out = r;
  for (auto& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void require_min_size(const Raster& r, int min_side, const char* what) {
  if (r.width() < min_side || r.height() < min_side) {
    throw Error("too_small", std::string(what) + ": image must be at least " +
                                 std::to_string(min_side) + "x" + std::to_string(min_side));
  }
}

}  // namespace spdchar
