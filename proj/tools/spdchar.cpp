// spdchar: chart generation, pipeline runs and SPD-NPS / SPD-MTF measurement.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdchar/acceptance.hpp"
#include "spdchar/charts.hpp"
#include "spdchar/config.hpp"
#include "spdchar/error.hpp"
#include "spdchar/experiment.hpp"
#include "spdchar/pipeline.hpp"
#include "spdchar/raster.hpp"

namespace fs = std::filesystem;
using namespace spdchar;

namespace {

bool g_quiet = false;

void log_line(const std::string& msg) {
  if (!g_quiet) std::cerr << "spdchar: " << msg << "\n";
}

// Removes every registered file unless commit() is called.
class Artifacts {
public:
  ~Artifacts() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
  }
  const fs::path& add(fs::path p) { return files_.emplace_back(std::move(p)); }
  void commit() { committed_ = true; }

private:
  std::vector<fs::path> files_;
  bool committed_ = false;
};

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io_error", "cannot create directory " + dir.string());
}

// Pipeline options shared by every subcommand that runs the pipeline.
struct ConfigFlags {
  std::string file;
  std::string variant;
  double snr = 0.0;
  double blur = -1.0;
  std::vector<std::string> sets;

  void add_to(CLI::App* app) {
    app->add_option("--config", file, "pipeline config file (key = value)")->check(CLI::ExistingFile);
    app->add_option("--variant", variant, "linear | nonlinear (overrides the config file)");
    app->add_option("--snr", snr, "SNR at saturation (overrides the config file)");
    app->add_option("--blur-sigma", blur, "lens blur sigma in pixels (overrides the config file)");
    app->add_option("--set", sets, "extra config override, key=value (repeatable)");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = file.empty() ? PipelineConfig{} : load_config(file);
    if (!variant.empty()) cfg.variant = parse_variant(variant);
    if (snr > 0.0) cfg.snr_at_saturation = snr;
    if (blur >= 0.0) cfg.blur_sigma = blur;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("invalid_argument", "--set expects key=value, got '" + kv + "'");
      apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

std::vector<Stage> parse_taps(const std::vector<std::string>& names) {
  std::vector<Stage> taps;
  for (const auto& n : names) taps.push_back(parse_stage(n));
  return taps;
}

// ---- chart ---------------------------------------------------------------

struct ChartArgs {
  std::string type;
  int side = 512;
  std::uint64_t seed = 0;
  double level = 0.5;
  int count = 5;
  int bit_depth = 16;
  double r_min = -1, r_max = -1, exponent = -1, lo = -1, hi = -1;
  std::string out;
};

int cmd_chart(const ChartArgs& a) {
  Artifacts artifacts;
  if (a.type == "dead-leaves") {
    DeadLeavesParams p = default_dead_leaves(a.side, a.seed);
    if (a.r_min > 0) p.r_min = a.r_min;
    if (a.r_max > 0) p.r_max = a.r_max;
    if (a.exponent > 0) p.exponent = a.exponent;
    if (a.lo >= 0) p.intensity_lo = a.lo;
    if (a.hi >= 0) p.intensity_hi = a.hi;
    ensure_dir(fs::path(a.out).parent_path());
    save_png(generate_dead_leaves(p), a.bit_depth, artifacts.add(a.out));
  } else if (a.type == "uniform") {
    ensure_dir(fs::path(a.out).parent_path());
    save_png(generate_uniform_patch(a.side, a.level), a.bit_depth, artifacts.add(a.out));
  } else if (a.type == "synthetic") {
    ensure_dir(a.out);
    const auto scenes = generate_synthetic_scene_set(a.count, a.side, a.seed);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "synthetic_%02zu.png", i);
      save_png(scenes[i], a.bit_depth, artifacts.add(fs::path(a.out) / name));
    }
  } else {
    throw Error("invalid_argument", "unknown chart type '" + a.type + "'");
  }
  artifacts.commit();
  log_line("wrote " + a.out);
  return 0;
}

// ---- pipeline ------------------------------------------------------------

struct PipelineArgs {
  ConfigFlags config;
  std::string scene;
  std::vector<std::string> taps{"end"};
  int replicate_index = 0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string save_config;
};

int cmd_pipeline(const PipelineArgs& a) {
  PipelineConfig cfg = a.config.resolve();
  cfg.seed = a.seed;
  cfg.replicate_index = a.replicate_index;
  const auto taps = parse_taps(a.taps);
  const Raster scene = load_png(a.scene);

  std::vector<std::pair<Stage, Raster>> captured;
  const Stage last = *std::max_element(taps.begin(), taps.end());
  run_pipeline(scene, cfg, last, [&](Stage s, const Raster& img) {
    if (std::find(taps.begin(), taps.end(), s) != taps.end()) captured.emplace_back(s, img);
  });

  Artifacts artifacts;
  ensure_dir(a.out_dir);
  for (const auto& [stage, img] : captured) {
    // Noise can push samples outside [0, 1]; PNG output is clipped.
    save_png(clamp01(img), 16,
             artifacts.add(fs::path(a.out_dir) / (std::string(to_string(stage)) + ".png")));
  }
  if (!a.save_config.empty()) save_config(cfg, artifacts.add(a.save_config));
  artifacts.commit();
  log_line("wrote " + std::to_string(captured.size()) + " tap images to " + a.out_dir);
  return 0;
}

// ---- measure / ensemble --------------------------------------------------

struct MeasureArgs {
  ConfigFlags config;
  std::string spec_file;
  std::vector<std::string> scenes;
  int synthetic = 0;
  bool dead_leaves = false;
  int side = 512;
  std::vector<std::string> taps{"end"};
  std::vector<std::string> measures{"nps", "mtf"};
  std::string noise = "scene";
  int replicates = kDefaultReplicates;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: "out", or the spec file's directory
  std::string save_spec;
};

ExperimentSpec build_spec(const MeasureArgs& a, bool ensemble_mode) {
  ExperimentSpec spec;
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + a.spec_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    spec = parse_experiment_json(text);
    if (!a.out_dir.empty()) spec.output_dir = a.out_dir;
    spec.write_ensemble = spec.write_ensemble && ensemble_mode;
    return spec;
  }
  for (const auto& s : a.scenes) spec.scene_paths.emplace_back(s);
  spec.synthetic_count = a.synthetic;
  spec.synthetic_side = a.side;
  spec.dead_leaves = a.dead_leaves;
  spec.config = a.config.resolve();
  spec.config_source = a.config.file;
  spec.taps = parse_taps(a.taps);
  spec.measure_nps = spec.measure_mtf = false;
  for (const auto& m : a.measures) {
    if (m == "nps") spec.measure_nps = true;
    else if (m == "mtf") spec.measure_mtf = true;
    else throw Error("invalid_argument", "unknown measure '" + m + "'");
  }
  if (a.noise == "scene") spec.noise = NoiseSource::Scene;
  else if (a.noise == "uniform") spec.noise = NoiseSource::UniformPatch;
  else throw Error("invalid_argument", "unknown noise source '" + a.noise + "'");
  spec.replicates = a.replicates;
  spec.master_seed = a.seed;
  spec.output_dir = a.out_dir.empty() ? "out" : a.out_dir;
  spec.write_ensemble = ensemble_mode;
  return spec;
}

int cmd_measure(const MeasureArgs& a, bool ensemble_mode) {
  const ExperimentSpec spec = build_spec(a, ensemble_mode);
  if (ensemble_mode && spec.scene_count() < 2) {
    throw Error("invalid_argument", "an ensemble needs at least two scenes");
  }
  if (!a.save_spec.empty()) {
    Artifacts artifacts;
    std::ofstream out(artifacts.add(a.save_spec), std::ios::binary);
    out << to_json_text(spec);
    if (!out) throw Error("io_error", "failed writing " + a.save_spec);
    out.close();
    run_experiment(spec, log_line);
    artifacts.commit();
    return 0;
  }
  run_experiment(spec, log_line);
  return 0;
}

// ---- reproduce -----------------------------------------------------------

struct ReproduceArgs {
  bool quick = false;
  bool strict = false;
  bool skip_grid = false;
  std::uint64_t seed = acceptance::Options{}.seed;
  std::string out_dir = "reproduce";
};

int cmd_reproduce(const ReproduceArgs& a) {
  ensure_dir(a.out_dir);
  const fs::path report_path = fs::path(a.out_dir) / "report.txt";
  Artifacts artifacts;
  std::ofstream report(artifacts.add(report_path), std::ios::binary);
  if (!report) throw Error("io_error", "cannot write " + report_path.string());

  // Canned grid: {linear, nonlinear} x {SNR 5, 40}, post-denoise and final
  // taps, over synthetic scenes plus the dead-leaves chart.
  if (!a.skip_grid) {
    for (auto variant : {PipelineVariant::Linear, PipelineVariant::Nonlinear}) {
      for (double snr : {5.0, 40.0}) {
        ExperimentSpec spec;
        spec.synthetic_count = a.quick ? 3 : 5;
        spec.synthetic_side = a.quick ? 256 : 512;
        spec.dead_leaves = true;
        spec.config.variant = variant;
        spec.config.snr_at_saturation = snr;
        spec.taps = {Stage::Denoise, Stage::Sharpen};
        spec.replicates = a.quick ? 4 : kDefaultReplicates;
        spec.master_seed = a.seed;
        spec.output_dir = fs::path(a.out_dir) / "grid" /
                          (std::string(to_string(variant)) + "_snr" + std::to_string(int(snr)));
        log_line("grid " + spec.output_dir.string());
        const auto result = run_experiment(spec, log_line);
        for (const auto& p : result.written) artifacts.add(p);
        report << "grid " << to_string(variant) << " SNR " << snr << ": " << result.written.size()
               << " files in " << spec.output_dir.string() << "\n";
      }
    }
  }

  acceptance::Options options;
  options.quick = a.quick;
  options.seed = a.seed;
  options.work_dir = fs::path(a.out_dir) / "scratch";
  int passed = 0;
  const auto results = acceptance::run_all(options, [&](const acceptance::Result& r) {
    const std::string line = acceptance::format(r);
    report << line << "\n";
    report.flush();
    log_line(line);
    passed += r.pass;
  });
  report << "summary: " << passed << "/" << results.size() << " criteria passed ("
         << (a.quick ? "quick" : "full") << " mode)\n";
  report.close();
  if (!report) throw Error("io_error", "failed writing " + report_path.string());
  artifacts.commit();
  log_line("report written to " + report_path.string());
  return a.strict && passed != static_cast<int>(results.size()) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-and-process-dependent MTF/NPS measurement with simulated camera pipelines"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("-q,--quiet", g_quiet, "suppress progress lines");

  ChartArgs chart;
  auto* c = app.add_subcommand("chart", "generate test charts as PNG");
  c->add_option("type", chart.type, "dead-leaves | uniform | synthetic")->required();
  c->add_option("--side", chart.side, "image side in pixels");
  c->add_option("--seed", chart.seed, "chart seed");
  c->add_option("--level", chart.level, "uniform patch level in [0, 1]");
  c->add_option("--count", chart.count, "number of synthetic scenes");
  c->add_option("--bit-depth", chart.bit_depth, "8 or 16");
  c->add_option("--r-min", chart.r_min, "dead-leaves minimum radius");
  c->add_option("--r-max", chart.r_max, "dead-leaves maximum radius");
  c->add_option("--exponent", chart.exponent, "dead-leaves radius exponent");
  c->add_option("--lo", chart.lo, "dead-leaves minimum intensity");
  c->add_option("--hi", chart.hi, "dead-leaves maximum intensity");
  c->add_option("-o,--out", chart.out, "output PNG (directory for synthetic)")->required();

  PipelineArgs pipe;
  auto* p = app.add_subcommand("pipeline", "run one capture and write tap images");
  pipe.config.add_to(p);
  p->add_option("--scene", pipe.scene, "input PNG")->required()->check(CLI::ExistingFile);
  p->add_option("--tap", pipe.taps, "stages to write (repeatable; 'end' = final)");
  p->add_option("--replicate-index", pipe.replicate_index, "replicate index");
  p->add_option("--seed", pipe.seed, "pipeline seed");
  p->add_option("-o,--out-dir", pipe.out_dir, "output directory");
  p->add_option("--save-config", pipe.save_config, "also write the resolved config");

  MeasureArgs measure, ens;
  auto setup_measure = [](CLI::App* s, MeasureArgs& m) {
    m.config.add_to(s);
    s->add_option("--spec", m.spec_file, "run a saved experiment spec (JSON); only --out-dir still applies")
        ->check(CLI::ExistingFile);
    s->add_option("--scene", m.scenes, "scene PNG (repeatable)")->check(CLI::ExistingFile);
    s->add_option("--synthetic", m.synthetic, "number of synthetic dead-leaves scenes");
    s->add_flag("--dead-leaves", m.dead_leaves, "include the default dead-leaves chart");
    s->add_option("--side", m.side, "side of generated scenes");
    s->add_option("--tap", m.taps, "stages to measure (repeatable; 'end' = final)");
    s->add_option("--measure", m.measures, "nps and/or mtf (repeatable)");
    s->add_option("--noise", m.noise, "MTF noise term: scene | uniform");
    s->add_option("--replicates", m.replicates, "replicates per scene");
    s->add_option("--seed", m.seed, "master seed");
    s->add_option("-o,--out-dir", m.out_dir, "output directory");
    s->add_option("--save-spec", m.save_spec, "write the experiment spec as JSON");
  };
  auto* m = app.add_subcommand("measure", "measure NPS/MTF per scene");
  setup_measure(m, measure);
  auto* e = app.add_subcommand("ensemble", "measure a scene set and aggregate");
  setup_measure(e, ens);

  ReproduceArgs repro;
  auto* r = app.add_subcommand("reproduce", "run the validation grid and acceptance checks");
  r->add_flag("--quick", repro.quick, "smaller images and scene sets");
  r->add_flag("--strict", repro.strict, "exit 3 if any criterion fails");
  r->add_flag("--skip-grid", repro.skip_grid, "only run the acceptance checks");
  r->add_option("--seed", repro.seed, "master seed");
  r->add_option("-o,--out-dir", repro.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "spdchar: error: usage: " << err.what() << "\n";
    return 2;
  }

  try {
    if (*c) return cmd_chart(chart);
    if (*p) return cmd_pipeline(pipe);
    if (*m) return cmd_measure(measure, false);
    if (*e) return cmd_measure(ens, true);
    if (*r) return cmd_reproduce(repro);
  } catch (const Error& err) {
    std::cerr << "spdchar: error: " << err.code() << ": " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "spdchar: error: internal: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
