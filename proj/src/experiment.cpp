#include "spdchar/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "spdchar/charts.hpp"
#include "spdchar/config.hpp"
#include "spdchar/error.hpp"
#include "spdchar/rng.hpp"
#include "spdchar/svg_plot.hpp"

namespace spdchar {

using nlohmann::json;

namespace {

constexpr int kSpecVersion = 1;
constexpr std::uint64_t kSceneStream = 0;
constexpr std::uint64_t kPipelineStream = 1;
constexpr std::uint64_t kChartStream = 2;

std::string_view to_string(NoiseSource n) {
  return n == NoiseSource::Scene ? "scene" : "uniform";
}

NoiseSource parse_noise_source(std::string_view s) {
  if (s == "scene") return NoiseSource::Scene;
  if (s == "uniform") return NoiseSource::UniformPatch;
  throw Error("invalid_argument", "unknown noise source '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

struct Scene {
  std::string id;
  Raster image;
};

std::vector<Scene> load_scenes(const ExperimentSpec& spec) {
  std::vector<Scene> scenes;
  char prefix[16];
  for (const auto& path : spec.scene_paths) {
    std::snprintf(prefix, sizeof prefix, "%02zu_", scenes.size());
    scenes.push_back({prefix + path.stem().string(), to_luminance(load_png(path))});
  }
  if (spec.synthetic_count > 0) {
    auto set = generate_synthetic_scene_set(spec.synthetic_count, spec.synthetic_side,
                                            derive_seed(spec.master_seed, kSceneStream));
    for (std::size_t j = 0; j < set.size(); ++j) {
      char id[32];
      std::snprintf(id, sizeof id, "%02zu_synthetic%02zu", scenes.size(), j);
      scenes.push_back({id, std::move(set[j])});
    }
  }
  if (spec.dead_leaves) {
    std::snprintf(prefix, sizeof prefix, "%02zu_", scenes.size());
    scenes.push_back({std::string(prefix) + "dead_leaves",
                      generate_dead_leaves(default_dead_leaves(
                          spec.synthetic_side, derive_seed(spec.master_seed, kChartStream)))});
  }
  return scenes;
}

double mean_level(const Raster& img) {
  const auto d = img.data();
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

// Tracks written files so a failed run can be rolled back.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) std::filesystem::remove(p, ec);
    if (created_dir_) std::filesystem::remove(dir_, ec);
  }

  void prepare() {
    std::error_code ec;
    if (!std::filesystem::exists(dir_)) {
      if (!std::filesystem::create_directories(dir_, ec) || ec) {
        throw Error("io_error", "cannot create output directory " + dir_.string());
      }
      created_dir_ = true;
    }
  }

  std::filesystem::path add(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }

  void write_text(const std::string& name, const std::string& text) {
    const auto path = add(name);
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("io_error", "failed writing " + path.string());
  }

  std::vector<std::filesystem::path> commit() {
    committed_ = true;
    return files_;
  }

private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

json sidecar(const ExperimentSpec& spec, const SceneResult& r) {
  return json{
      {"scene", r.scene_id},
      {"tap", std::string(to_string(r.tap))},
      {"variant", std::string(to_string(spec.config.variant))},
      {"config_hash", hex64(config_hash(spec.config))},
      {"master_seed", spec.master_seed},
      {"pipeline_seed", r.pipeline_seed},
      {"replicates", spec.replicates},
      {"noise_source", std::string(to_string(spec.noise))},
      {"windowing", true},
      {"noise_scale", r.mtf.noise_scale},
      {"clamped_bins", r.mtf.clamped_bins},
      {"flagged_bins", r.mtf.flagged_bins},
      {"nps_invalid_bins", r.nps.invalid_count()},
  };
}

}  // namespace

std::size_t ExperimentSpec::scene_count() const noexcept {
  return scene_paths.size() + static_cast<std::size_t>(std::max(synthetic_count, 0)) +
         (dead_leaves ? 1 : 0);
}

void ExperimentSpec::validate() const {
  config.validate();
  if (synthetic_count < 0) throw Error("invalid_argument", "synthetic count must be >= 0");
  if (scene_count() == 0) throw Error("invalid_argument", "experiment has no scenes");
  if (replicates < 2) throw Error("too_few_replicates", "at least two replicates are required");
  if (taps.empty()) throw Error("invalid_argument", "no taps requested");
  if (!measure_nps && !measure_mtf) throw Error("invalid_argument", "no measures requested");
  if ((synthetic_count > 0 || dead_leaves) && (synthetic_side < 160 || synthetic_side % 2)) {
    throw Error("invalid_argument", "synthetic side must be even and >= 160");
  }
  std::set<Stage> seen(taps.begin(), taps.end());
  if (seen.size() != taps.size()) throw Error("invalid_argument", "duplicate tap");
}

std::string to_json_text(const ExperimentSpec& spec) {
  json paths = json::array();
  for (const auto& p : spec.scene_paths) paths.push_back(p.string());
  json taps = json::array();
  for (Stage t : spec.taps) taps.push_back(std::string(to_string(t)));
  json measures = json::array();
  if (spec.measure_nps) measures.push_back("nps");
  if (spec.measure_mtf) measures.push_back("mtf");
  const json j{
      {"spec_version", kSpecVersion},
      {"scene_paths", paths},
      {"synthetic_count", spec.synthetic_count},
      {"synthetic_side", spec.synthetic_side},
      {"dead_leaves", spec.dead_leaves},
      {"config", to_config_text(spec.config)},
      {"config_source", spec.config_source},
      {"taps", taps},
      {"measures", measures},
      {"noise_source", std::string(to_string(spec.noise))},
      {"replicates", spec.replicates},
      {"output_dir", spec.output_dir.string()},
      {"master_seed", spec.master_seed},
      {"write_ensemble", spec.write_ensemble},
  };
  return j.dump(2) + "\n";
}

ExperimentSpec parse_experiment_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("parse_error", std::string("experiment spec: ") + e.what());
  }
  try {
    if (j.at("spec_version").get<int>() != kSpecVersion) {
      throw Error("unsupported_version", "unsupported experiment spec_version");
    }
    ExperimentSpec spec;
    for (const auto& p : j.at("scene_paths")) spec.scene_paths.emplace_back(p.get<std::string>());
    spec.synthetic_count = j.at("synthetic_count").get<int>();
    spec.synthetic_side = j.at("synthetic_side").get<int>();
    spec.dead_leaves = j.at("dead_leaves").get<bool>();
    spec.config = parse_config(j.at("config").get<std::string>());
    spec.config_source = j.value("config_source", "");
    spec.taps.clear();
    for (const auto& t : j.at("taps")) spec.taps.push_back(parse_stage(t.get<std::string>()));
    spec.measure_nps = spec.measure_mtf = false;
    for (const auto& m : j.at("measures")) {
      const auto name = m.get<std::string>();
      if (name == "nps") spec.measure_nps = true;
      else if (name == "mtf") spec.measure_mtf = true;
      else throw Error("invalid_argument", "unknown measure '" + name + "'");
    }
    spec.noise = parse_noise_source(j.at("noise_source").get<std::string>());
    spec.replicates = j.at("replicates").get<int>();
    spec.output_dir = j.at("output_dir").get<std::string>();
    spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    spec.write_ensemble = j.value("write_ensemble", true);
    return spec;
  } catch (const json::exception& e) {
    throw Error("parse_error", std::string("experiment spec: ") + e.what());
  }
}

std::uint64_t scene_pipeline_seed(std::uint64_t master_seed, std::size_t scene_index) noexcept {
  return derive_seed(master_seed, {kPipelineStream, static_cast<std::uint64_t>(scene_index)});
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const ProgressLog& log) {
  spec.validate();
  const auto scenes = load_scenes(spec);

  ExperimentResult result;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    PipelineConfig cfg = spec.config;
    cfg.seed = scene_pipeline_seed(spec.master_seed, i);
    if (log) log("scene " + scenes[i].id + ": " + std::to_string(spec.replicates) + " replicates");
    auto sets = capture_replicates(scenes[i].image, cfg, spec.taps, spec.replicates, scenes[i].id);
    for (std::size_t t = 0; t < spec.taps.size(); ++t) {
      SceneResult r;
      r.scene_id = scenes[i].id;
      r.tap = spec.taps[t];
      r.pipeline_seed = cfg.seed;
      if (spec.noise == NoiseSource::Scene) {
        r.nps = spd_nps(sets[t]);
      } else {
        r.nps = uniform_patch_nps(cfg, mean_level(scenes[i].image), spec.replicates,
                                  scenes[i].image.width(), spec.taps[t]);
      }
      if (spec.measure_mtf) r.mtf = spd_mtf(scenes[i].image, sets[t], r.nps);
      result.scenes.push_back(std::move(r));
    }
  }

  OutputSet out(spec.output_dir);
  out.prepare();
  out.write_text("experiment.json", to_json_text(spec));
  for (const auto& r : result.scenes) {
    const std::string stem = r.scene_id + "_" + std::string(to_string(r.tap));
    if (spec.measure_nps) write_curve_csv(r.nps, out.add(stem + "_nps.csv"));
    if (spec.measure_mtf) write_curve_csv(r.mtf.mtf, out.add(stem + "_mtf.csv"));
    out.write_text(stem + ".json", sidecar(spec, r).dump(2) + "\n");
  }

  if (spec.write_ensemble && scenes.size() >= 2) {
    for (std::size_t t = 0; t < spec.taps.size(); ++t) {
      const std::string tap(to_string(spec.taps[t]));
      auto write_ensemble = [&](bool nps) {
        std::vector<Curve> members;
        for (std::size_t i = 0; i < scenes.size(); ++i) {
          const auto& r = result.scenes[i * spec.taps.size() + t];
          members.push_back(nps ? r.nps : r.mtf.mtf);
        }
        const CurveEnsemble e = ensemble(members);
        const std::string stem = "ensemble_" + tap + (nps ? "_nps" : "_mtf");
        write_curve_csv(e.mean, out.add(stem + "_mean.csv"));
        write_curve_csv(e.stddev, out.add(stem + "_stddev.csv"));

        PlotSpec plot;
        plot.title = std::string(nps ? "SPD-NPS" : "SPD-MTF") + ", " +
                     std::string(to_string(spec.config.variant)) + " pipeline, tap " + tap;
        plot.y_label = nps ? "NPS" : "MTF";
        plot.log_y = nps;
        for (std::size_t i = 0; i < e.members.size(); ++i) {
          plot.series.push_back({&e.members[i], i == 0 ? "scenes" : "", "#9a9a9a", 1.0, false});
        }
        Curve upper = e.mean, lower = e.mean;
        for (std::size_t k = 0; k < upper.size(); ++k) {
          upper.value[k] += e.stddev.value[k];
          lower.value[k] -= e.stddev.value[k];
        }
        plot.series.push_back({&e.mean, "mean", "#000000", 2.0, false});
        plot.series.push_back({&upper, "mean +/- std", "#c0392b", 1.2, true});
        plot.series.push_back({&lower, "", "#c0392b", 1.2, true});
        write_svg(plot, out.add(stem + ".svg"));
      };
      if (spec.measure_nps) write_ensemble(true);
      if (spec.measure_mtf) write_ensemble(false);
    }
  }
  result.written = out.commit();
  if (log) log("wrote " + std::to_string(result.written.size()) + " files to " + spec.output_dir.string());
  return result;
}

}  // namespace spdchar
