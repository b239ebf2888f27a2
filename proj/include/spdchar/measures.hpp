#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdchar/pipeline.hpp"
#include "spdchar/raster.hpp"
#include "spdchar/spectral.hpp"

namespace spdchar {

inline constexpr int kDefaultReplicates = 10;

/// Independently noise-realized captures of one scene through one pipeline.
/// Replicate i was produced with config.replicate_index = i.
struct ReplicateSet {
  std::string scene_id;
  PipelineConfig config;
  Stage tap = Stage::Sharpen;
  std::vector<Raster> replicates;  // single-channel luminance

  std::size_t count() const noexcept { return replicates.size(); }
  void validate() const;
};

/// Runs the pipeline `count` times with replicate indices 0..count-1 and keeps
/// the luminance of each tap image. Replicates run in parallel; the result
/// order is fixed.
ReplicateSet capture_replicates(const Raster& scene, const PipelineConfig& cfg, Stage tap,
                                int count, std::string scene_id = {});

/// One pipeline pass per replicate, collecting every requested tap. Entry j of
/// the result holds the replicates for taps[j].
std::vector<ReplicateSet> capture_replicates(const Raster& scene, const PipelineConfig& cfg,
                                             std::span<const Stage> taps, int count,
                                             const std::string& scene_id = {});

/// Wraps already-captured luminance replicates.
ReplicateSet make_replicate_set(std::vector<Raster> replicates, std::string scene_id = {});

/// Replicate-based NPS: mean-image subtraction, mean 2D power spectrum of the
/// residuals scaled by n/(n-1), radial average, 7-bin smoothing.
Curve spd_nps(const ReplicateSet& rs);

/// Classical NPS from a uniform patch of the given level.
Curve uniform_patch_nps(const PipelineConfig& cfg, double level, int count, int side = 512,
                        Stage tap = Stage::Sharpen);

struct MtfOptions {
  /// Taper input and output images to a neutral value before transforming.
  bool window = true;
  /// Scale the (unwindowed) noise curve by the fraction of replicate noise
  /// energy that survives the window, so it matches the noise power left in
  /// the windowed replicates.
  bool scale_noise_to_window = true;
  /// Relative validity floor on the input power spectrum, times the first
  /// non-DC bin.
  double input_floor = 1e-6;
};

struct MtfResult {
  Curve mtf;
  /// Valid bins where output power minus noise was negative and set to 0.
  std::size_t clamped_bins = 0;
  /// Bins flagged invalid because the input power fell below the floor.
  std::size_t flagged_bins = 0;
  /// Factor applied to the supplied noise curve.
  double noise_scale = 1.0;
};

/// sum(w^2 * v) / sum(v) with v the per-pixel variance across replicates;
/// equals the mask's mean squared weight for spatially stationary noise.
double windowed_noise_fraction(const ReplicateSet& rs, const WindowMask& mask);

/// Power-spectrum ratio MTF: sqrt(max(PS_out - NPS, 0) / PS_in).
MtfResult spd_mtf(const Raster& input_scene, const ReplicateSet& rs, const Curve& nps,
                  const MtfOptions& options = {});

/// Dead-leaves MTF with the noise term taken from a uniform patch.
MtfResult direct_dead_leaves_mtf(const Raster& chart, const ReplicateSet& rs,
                                 const Curve& uniform_nps, const MtfOptions& options = {});

struct SceneMeasurement {
  Curve nps;
  MtfResult mtf;
};

/// Replicates through the pipeline, then scene NPS and scene MTF with that NPS
/// as the noise term.
SceneMeasurement measure_scene(const Raster& scene, const PipelineConfig& cfg, Stage tap,
                               int replicate_count = kDefaultReplicates,
                               const MtfOptions& options = {});

struct CurveEnsemble {
  std::vector<Curve> members;
  Curve mean;
  /// Population standard deviation per bin.
  Curve stddev;

  std::size_t size() const noexcept { return members.size(); }
};

CurveEnsemble ensemble(std::span<const Curve> curves);

/// Mean of stddev/mean over valid bins with frequency in [lo, hi] and
/// positive mean.
double band_relative_spread(const CurveEnsemble& e, double lo, double hi);

}  // namespace spdchar
