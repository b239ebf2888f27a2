#include "spdchar/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>

#include "spdchar/error.hpp"

namespace spdchar {

namespace {

// FFTW planning is not thread-safe; executing an existing plan on new arrays
// is. Plans are created once per size under a lock and reused with
// fftw_execute_dft. fftw_malloc buffers all share the plan's alignment.
class PlanCache {
public:
  fftw_plan get(int width, int height, int sign = FFTW_FORWARD) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(width, height, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_2d(height, width, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw Error("fft_error", "FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

void require_same_grid(const Curve& a, const Curve& b) {
  if (!a.same_grid(b)) throw Error("grid_mismatch", "curves do not share a frequency grid");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Spectrum2D::Spectrum2D(int width, int height, std::vector<double> power)
    : width_(width), height_(height), power_(std::move(power)) {
  if (power_.size() != static_cast<std::size_t>(width) * height) {
    throw Error("invalid_shape", "spectrum size does not match dimensions");
  }
}

Spectrum2D& Spectrum2D::operator+=(const Spectrum2D& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error("dimension_mismatch", "spectra differ in size");
  }
  for (std::size_t i = 0; i < power_.size(); ++i) power_[i] += other.power_[i];
  return *this;
}

Spectrum2D& Spectrum2D::operator*=(double factor) {
  for (auto& p : power_) p *= factor;
  return *this;
}

std::vector<std::complex<double>> dft_2d(std::span<const double> samples, int width,
                                         int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width <= 0 || height <= 0 || samples.size() != n) {
    throw Error("invalid_shape", "dft_2d: sample count does not match dimensions");
  }
  fftw_plan plan = plan_cache().get(width, height);
  FftwBuffer in(fftw_alloc_complex(n));
  FftwBuffer out(fftw_alloc_complex(n));
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = samples[i];
    in[i][1] = 0.0;
  }
  fftw_execute_dft(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0], out[i][1]};
  return result;
}

std::vector<std::complex<double>> dft_2d(std::span<const std::complex<double>> samples,
                                         int width, int height, bool inverse) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width <= 0 || height <= 0 || samples.size() != n) {
    throw Error("invalid_shape", "dft_2d: sample count does not match dimensions");
  }
  fftw_plan plan = plan_cache().get(width, height, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  FftwBuffer in(fftw_alloc_complex(n));
  FftwBuffer out(fftw_alloc_complex(n));
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = samples[i].real();
    in[i][1] = samples[i].imag();
  }
  fftw_execute_dft(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0], out[i][1]};
  return result;
}

Spectrum2D power_spectrum_2d(std::span<const double> samples, int width, int height) {
  auto transform = dft_2d(samples, width, height);
  const double norm = 1.0 / (static_cast<double>(width) * height);
  std::vector<double> power(transform.size());
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(transform[i]) * norm;
  return Spectrum2D(width, height, std::move(power));
}

Spectrum2D power_spectrum_2d(const Raster& img) {
  if (img.channels() != 1) {
    throw Error("invalid_shape", "power_spectrum_2d expects a single-channel raster");
  }
  return power_spectrum_2d(img.plane(0), img.width(), img.height());
}

Spectrum2D power_spectrum_2d(const NoiseImage& img) {
  return power_spectrum_2d(img.data, img.width, img.height);
}

CrossSpectrum2D cross_power_spectrum_2d(const Raster& a, const Raster& b) {
  if (a.channels() != 1 || b.channels() != 1) {
    throw Error("invalid_shape", "cross_power_spectrum_2d expects single-channel rasters");
  }
  if (!a.same_shape(b)) throw Error("dimension_mismatch", "cross spectrum operands differ in size");
  auto fa = dft_2d(a.plane(0), a.width(), a.height());
  auto fb = dft_2d(b.plane(0), b.width(), b.height());
  const double norm = 1.0 / (static_cast<double>(a.width()) * a.height());
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = fa[i] * std::conj(fb[i]) * norm;
  return CrossSpectrum2D(a.width(), a.height(), std::move(fa));
}

std::string_view to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::NPS: return "nps";
    case CurveKind::MTF: return "mtf";
    case CurveKind::PowerSpectrum: return "power_spectrum";
  }
  return "unknown";
}

std::size_t Curve::invalid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
}

Curve make_curve(CurveKind kind, int side, std::vector<double> values) {
  Curve c;
  c.kind = kind;
  c.frequency.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) c.frequency[k] = static_cast<double>(k) / side;
  c.value = std::move(values);
  c.valid.assign(c.value.size(), 1);
  return c;
}

Curve radial_average(const Spectrum2D& s, CurveKind kind) {
  if (s.width() != s.height()) {
    throw Error("non_square", "radial averaging requires a square spectrum");
  }
  const int n = s.width();
  const int half = n / 2;
  const int lo = -((n + 1) / 2) + 1;
  std::vector<double> sum(static_cast<std::size_t>(half) + 1, 0.0);
  std::vector<std::size_t> count(sum.size(), 0);
  for (int v = lo; v <= half; ++v) {
    for (int u = lo; u <= half; ++u) {
      const double r = std::sqrt(static_cast<double>(u) * u + static_cast<double>(v) * v);
      if (r > half) continue;
      const auto k = static_cast<std::size_t>(std::lround(r));
      sum[k] += s.at(u, v);
      ++count[k];
    }
  }
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= static_cast<double>(count[k]);
  return make_curve(kind, n, std::move(sum));
}

namespace {

void smooth_range(std::span<const double> src, std::span<double> dst) {
  const int n = static_cast<int>(src.size());
  const int reach = kSmoothingWindow / 2;
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - reach);
    const int b = std::min(n - 1, i + reach);
    double total = 0.0;
    for (int j = a; j <= b; ++j) total += src[j];
    dst[i] = total / (b - a + 1);
  }
}

}  // namespace

Curve smooth_curve(const Curve& c) {
  if (c.size() < static_cast<std::size_t>(kSmoothingWindow)) {
    throw Error("too_short", "smoothing needs at least 7 bins");
  }
  Curve out = c;
  smooth_range(c.value, out.value);
  return out;
}

Curve smooth_valid_runs(const Curve& c) {
  Curve out = c;
  std::size_t i = 0;
  while (i < c.size()) {
    if (!c.is_valid(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < c.size() && c.is_valid(j)) ++j;
    smooth_range(std::span(c.value).subspan(i, j - i), std::span(out.value).subspan(i, j - i));
    i = j;
  }
  return out;
}

Curve curve_subtract(const Curve& a, const Curve& b) {
  require_same_grid(a, b);
  Curve out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.value[i] = a.value[i] - b.value[i];
    out.valid[i] = a.valid[i] && b.valid[i];
  }
  return out;
}

Curve curve_ratio(const Curve& a, const Curve& b, double floor) {
  require_same_grid(a, b);
  Curve out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b.value[i] < floor || !b.is_valid(i) || !a.is_valid(i)) {
      out.value[i] = 0.0;
      out.valid[i] = 0;
    } else {
      out.value[i] = a.value[i] / b.value[i];
    }
  }
  return out;
}

Curve curve_sqrt(const Curve& c) {
  Curve out = c;
  for (auto& v : out.value) {
    if (v < 0.0) throw Error("domain_error", "curve_sqrt of a negative bin");
    v = std::sqrt(v);
  }
  return out;
}

Curve curve_scale(const Curve& c, double factor) {
  Curve out = c;
  for (auto& v : out.value) v *= factor;
  return out;
}

double taper_profile(int edge_distance) noexcept {
  if (edge_distance >= WindowMask::kTaperLength) return 1.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * edge_distance / WindowMask::kTaperLength);
}

double WindowMask::mean_square_weight() const noexcept {
  double total = 0.0;
  for (double w : weights) total += w * w;
  return total / static_cast<double>(weights.size());
}

WindowMask make_window(int width, int height, double neutral) {
  if (width < WindowMask::kMinimumSide || height < WindowMask::kMinimumSide) {
    throw Error("too_small", "windowing needs images of at least 160x160 pixels");
  }
  WindowMask mask{width, height, neutral, {}};
  mask.weights.resize(static_cast<std::size_t>(width) * height);
  std::vector<double> col(width), row(height);
  for (int x = 0; x < width; ++x) col[x] = taper_profile(std::min(x, width - 1 - x));
  for (int y = 0; y < height; ++y) row[y] = taper_profile(std::min(y, height - 1 - y));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      mask.weights[static_cast<std::size_t>(y) * width + x] = std::min(col[x], row[y]);
    }
  }
  return mask;
}

Raster apply_window(const Raster& img, const WindowMask& mask) {
  if (img.width() != mask.width || img.height() != mask.height) {
    throw Error("dimension_mismatch", "window mask and image differ in size");
  }
  Raster out = img;
  for (int c = 0; c < img.channels(); ++c) {
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = mask.neutral + mask.weights[i] * (dst[i] - mask.neutral);
    }
  }
  return out;
}

double border_mean(const Raster& img, int frame) {
  if (img.channels() != 1) throw Error("invalid_shape", "border_mean expects one channel");
  if (2 * frame > img.width() || 2 * frame > img.height()) {
    throw Error("too_small", "border frame wider than the image");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < img.height(); ++y) {
    const bool edge_row = y < frame || y >= img.height() - frame;
    for (int x = 0; x < img.width(); ++x) {
      if (edge_row || x < frame || x >= img.width() - frame) {
        total += img(x, y);
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

void write_curve_csv(const Curve& c, std::ostream& out) {
  out << "frequency_cpp,value,valid\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << format_double(c.frequency[i]) << ',' << format_double(c.value[i]) << ','
        << (c.is_valid(i) ? 1 : 0) << '\n';
  }
}

void write_curve_csv(const Curve& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path.string() + " for writing");
  write_curve_csv(c, out);
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

Curve read_curve_csv(std::istream& in, CurveKind kind) {
  std::string line;
  if (!std::getline(in, line) || line != "frequency_cpp,value,valid") {
    throw Error("parse_error", "missing curve CSV header");
  }
  Curve c;
  c.kind = kind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f, v, ok;
    if (!std::getline(fields, f, ',') || !std::getline(fields, v, ',') ||
        !std::getline(fields, ok)) {
      throw Error("parse_error", "malformed curve row: " + line);
    }
    try {
      c.frequency.push_back(std::stod(f));
      c.value.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw Error("parse_error", "non-numeric curve row: " + line);
    }
    if (ok != "0" && ok != "1") throw Error("parse_error", "bad validity flag: " + line);
    c.valid.push_back(ok == "1" ? 1 : 0);
  }
  return c;
}

Curve read_curve_csv(const std::filesystem::path& path, CurveKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  return read_curve_csv(in, kind);
}

}  // namespace spdchar
