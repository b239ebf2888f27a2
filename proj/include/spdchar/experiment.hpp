#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "spdchar/measures.hpp"
#include "spdchar/pipeline.hpp"

namespace spdchar {

/// Where the noise term of a scene MTF comes from.
enum class NoiseSource {
  /// The scene's own replicate NPS.
  Scene,
  /// A uniform patch at the scene's mean luminance (classical baseline).
  UniformPatch,
};

/// A fully serializable measurement run.
///
/// Seeding: scene i (files first, then synthetic scenes) is captured with
/// pipeline seed derive_seed(master_seed, {1, i}); synthetic scene j is drawn
/// from generate_synthetic_scene_set with seed derive_seed(master_seed, 0).
/// Appending scenes therefore never changes the results for earlier ones.
struct ExperimentSpec {
  std::vector<std::filesystem::path> scene_paths;
  int synthetic_count = 0;
  int synthetic_side = 512;
  /// Adds the default dead-leaves chart (seeded like a synthetic scene) as an
  /// extra scene after the synthetic ones.
  bool dead_leaves = false;
  PipelineConfig config;
  /// Informational: the file `config` was loaded from, if any.
  std::string config_source;
  std::vector<Stage> taps{Stage::Sharpen};
  bool measure_nps = true;
  bool measure_mtf = true;
  NoiseSource noise = NoiseSource::Scene;
  int replicates = kDefaultReplicates;
  std::filesystem::path output_dir = "out";
  std::uint64_t master_seed = 0;
  /// Write ensemble mean/stddev CSVs and SVG overlays when there are >= 2
  /// scenes.
  bool write_ensemble = true;

  std::size_t scene_count() const noexcept;
  void validate() const;
};

std::string to_json_text(const ExperimentSpec& spec);
ExperimentSpec parse_experiment_json(const std::string& text);

std::uint64_t scene_pipeline_seed(std::uint64_t master_seed, std::size_t scene_index) noexcept;

struct SceneResult {
  std::string scene_id;
  Stage tap = Stage::Sharpen;
  Curve nps;
  MtfResult mtf;
  std::uint64_t pipeline_seed = 0;
};

struct ExperimentResult {
  std::vector<SceneResult> scenes;  // scene-major, then tap order
  std::vector<std::filesystem::path> written;
};

using ProgressLog = std::function<void(const std::string&)>;

/// Computes every (scene, tap) measurement and writes CSVs, JSON sidecars and,
/// for ensembles, mean/stddev CSVs plus SVG plots into spec.output_dir. Files
/// already written are removed again if any step fails.
ExperimentResult run_experiment(const ExperimentSpec& spec, const ProgressLog& log = {});

}  // namespace spdchar
