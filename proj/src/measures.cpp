#include "spdchar/measures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "spdchar/charts.hpp"
#include "spdchar/error.hpp"
#include "spdchar/parallel.hpp"

namespace spdchar {

void ReplicateSet::validate() const {
  if (replicates.size() < 2) {
    throw Error("too_few_replicates", "at least two replicates are required");
  }
  for (const auto& r : replicates) {
    if (r.channels() != 1) throw Error("invalid_shape", "replicates must be luminance images");
    if (!r.same_shape(replicates.front())) {
      throw Error("dimension_mismatch", "replicates differ in size");
    }
  }
}

ReplicateSet capture_replicates(const Raster& scene, const PipelineConfig& cfg, Stage tap,
                                int count, std::string scene_id) {
  if (count < 1) throw Error("too_few_replicates", "replicate count must be positive");
  cfg.validate();
  ReplicateSet rs{std::move(scene_id), cfg, tap, {}};
  rs.replicates.resize(static_cast<std::size_t>(count));
  parallel_for(rs.replicates.size(), [&](std::size_t i) {
    PipelineConfig replicate_cfg = cfg;
    replicate_cfg.replicate_index = static_cast<int>(i);
    rs.replicates[i] = to_luminance(run_pipeline(scene, replicate_cfg, tap));
  });
  return rs;
}

std::vector<ReplicateSet> capture_replicates(const Raster& scene, const PipelineConfig& cfg,
                                             std::span<const Stage> taps, int count,
                                             const std::string& scene_id) {
  if (count < 1) throw Error("too_few_replicates", "replicate count must be positive");
  if (taps.empty()) throw Error("invalid_argument", "no taps requested");
  cfg.validate();
  const Stage last = *std::max_element(taps.begin(), taps.end());
  std::vector<ReplicateSet> sets;
  for (Stage tap : taps) {
    sets.push_back({scene_id, cfg, tap, std::vector<Raster>(static_cast<std::size_t>(count))});
  }
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    PipelineConfig replicate_cfg = cfg;
    replicate_cfg.replicate_index = static_cast<int>(i);
    run_pipeline(scene, replicate_cfg, last, [&](Stage stage, const Raster& img) {
      for (std::size_t j = 0; j < taps.size(); ++j) {
        if (taps[j] == stage) sets[j].replicates[i] = to_luminance(img);
      }
    });
  });
  return sets;
}

ReplicateSet make_replicate_set(std::vector<Raster> replicates, std::string scene_id) {
  ReplicateSet rs;
  rs.scene_id = std::move(scene_id);
  for (auto& r : replicates) rs.replicates.push_back(to_luminance(r));
  return rs;
}

Curve spd_nps(const ReplicateSet& rs) {
  rs.validate();
  const auto& first = rs.replicates.front();
  if (first.width() != first.height()) {
    throw Error("non_square", "NPS measurement requires square images");
  }
  const Raster mean = mean_image(rs.replicates);
  const std::size_t n = rs.count();

  std::vector<Spectrum2D> spectra(n);
  parallel_for(n, [&](std::size_t i) {
    spectra[i] = power_spectrum_2d(subtract_mean(rs.replicates[i], mean));
  });
  Spectrum2D total = std::move(spectra.front());
  for (std::size_t i = 1; i < n; ++i) total += spectra[i];
  // Average, then undo the (n-1)/n variance loss from estimating the mean
  // image from the same replicates.
  total *= 1.0 / static_cast<double>(n - 1);
  return smooth_curve(radial_average(total, CurveKind::NPS));
}

Curve uniform_patch_nps(const PipelineConfig& cfg, double level, int count, int side,
                        Stage tap) {
  const Raster patch = generate_uniform_patch(side, level);
  return spd_nps(capture_replicates(patch, cfg, tap, count, "uniform"));
}

double windowed_noise_fraction(const ReplicateSet& rs, const WindowMask& mask) {
  rs.validate();
  const Raster mean = mean_image(rs.replicates);
  if (mean.width() != mask.width || mean.height() != mask.height) {
    throw Error("dimension_mismatch", "window mask and replicates differ in size");
  }
  std::vector<double> variance(mean.plane_size(), 0.0);
  for (const auto& g : rs.replicates) {
    auto gp = g.plane(0);
    auto mp = mean.plane(0);
    for (std::size_t i = 0; i < variance.size(); ++i) {
      const double d = gp[i] - mp[i];
      variance[i] += d * d;
    }
  }
  double kept = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < variance.size(); ++i) {
    kept += mask.weights[i] * mask.weights[i] * variance[i];
    total += variance[i];
  }
  return total > 0.0 ? kept / total : mask.mean_square_weight();
}

MtfResult spd_mtf(const Raster& input_scene, const ReplicateSet& rs, const Curve& nps,
                  const MtfOptions& options) {
  rs.validate();
  const Raster input = to_luminance(input_scene);
  if (!input.same_shape(rs.replicates.front())) {
    throw Error("dimension_mismatch", "input scene and replicates differ in size");
  }
  if (input.width() != input.height()) {
    throw Error("non_square", "MTF measurement requires square images");
  }
  const std::size_t n = rs.count();

  std::optional<WindowMask> in_mask, out_mask;
  if (options.window) {
    in_mask = make_window(input.width(), input.height(), border_mean(input));
    out_mask = in_mask;
    out_mask->neutral = border_mean(mean_image(rs.replicates));
  }

  const Curve ps_in =
      radial_average(power_spectrum_2d(in_mask ? apply_window(input, *in_mask) : input));
  std::vector<Spectrum2D> spectra(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& g = rs.replicates[i];
    spectra[i] = power_spectrum_2d(out_mask ? apply_window(g, *out_mask) : g);
  });
  Spectrum2D total = std::move(spectra.front());
  for (std::size_t i = 1; i < n; ++i) total += spectra[i];
  total *= 1.0 / static_cast<double>(n);
  const Curve ps_out = radial_average(total);

  if (!nps.same_grid(ps_out)) {
    throw Error("grid_mismatch", "noise curve does not match the image frequency grid");
  }

  MtfResult result;
  if (options.window && options.scale_noise_to_window) {
    result.noise_scale = windowed_noise_fraction(rs, *out_mask);
  }
  Curve numerator = curve_subtract(ps_out, curve_scale(nps, result.noise_scale));
  for (std::size_t k = 0; k < numerator.size(); ++k) {
    if (numerator.value[k] < 0.0) {
      numerator.value[k] = 0.0;
      if (numerator.is_valid(k)) ++result.clamped_bins;
    }
  }
  const double floor = options.input_floor * (ps_in.size() > 1 ? ps_in.value[1] : ps_in.value[0]);
  Curve ratio = curve_ratio(numerator, ps_in, floor);
  result.flagged_bins = ratio.invalid_count();
  result.mtf = smooth_valid_runs(curve_sqrt(ratio));
  result.mtf.kind = CurveKind::MTF;
  return result;
}

MtfResult direct_dead_leaves_mtf(const Raster& chart, const ReplicateSet& rs,
                                 const Curve& uniform_nps, const MtfOptions& options) {
  return spd_mtf(chart, rs, uniform_nps, options);
}

SceneMeasurement measure_scene(const Raster& scene, const PipelineConfig& cfg, Stage tap,
                               int replicate_count, const MtfOptions& options) {
  const ReplicateSet rs = capture_replicates(scene, cfg, tap, replicate_count, "scene");
  Curve nps = spd_nps(rs);
  MtfResult mtf = spd_mtf(scene, rs, nps, options);
  return {std::move(nps), std::move(mtf)};
}

CurveEnsemble ensemble(std::span<const Curve> curves) {
  if (curves.size() < 2) throw Error("too_few_curves", "an ensemble needs at least two curves");
  for (const auto& c : curves) {
    if (!c.same_grid(curves.front())) {
      throw Error("grid_mismatch", "ensemble members do not share a frequency grid");
    }
  }
  CurveEnsemble e;
  e.members.assign(curves.begin(), curves.end());
  e.mean = curves.front();
  e.stddev = curves.front();
  const double n = static_cast<double>(curves.size());
  for (std::size_t k = 0; k < e.mean.size(); ++k) {
    double sum = 0.0;
    bool valid = true;
    for (const auto& c : curves) {
      sum += c.value[k];
      valid = valid && c.is_valid(k);
    }
    const double mean = sum / n;
    double squares = 0.0;
    for (const auto& c : curves) squares += (c.value[k] - mean) * (c.value[k] - mean);
    e.mean.value[k] = mean;
    e.stddev.value[k] = std::sqrt(squares / n);
    e.mean.valid[k] = e.stddev.valid[k] = valid ? 1 : 0;
  }
  return e;
}

double band_relative_spread(const CurveEnsemble& e, double lo, double hi) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < e.mean.size(); ++k) {
    const double f = e.mean.frequency[k];
    if (f < lo || f > hi || !e.mean.is_valid(k) || !(e.mean.value[k] > 0.0)) continue;
    total += e.stddev.value[k] / e.mean.value[k];
    ++count;
  }
  if (count == 0) throw Error("empty_band", "no valid bins in the requested band");
  return total / static_cast<double>(count);
}

}  // namespace spdchar
