#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "spdchar/charts.hpp"
#include "spdchar/error.hpp"
#include "spdchar/filters.hpp"
#include "spdchar/measures.hpp"
#include "spdchar/oracles.hpp"
#include "spdchar/pipeline.hpp"

using namespace spdchar;

namespace {

PipelineConfig noise_free(PipelineVariant v = PipelineVariant::Linear) {
  PipelineConfig cfg;
  cfg.variant = v;
  cfg.photon_noise = cfg.dark_noise = false;
  cfg.black_level = 0.0;
  cfg.white_level = 1.0;
  return cfg;
}

ReplicateSet white_noise_set(const Raster& base, double sigma, int count, std::uint64_t seed) {
  std::vector<Raster> reps;
  for (int i = 0; i < count; ++i) reps.push_back(add_dark_noise(base, 1.0, sigma, derive_seed(seed, i)));
  return make_replicate_set(std::move(reps));
}

}  // namespace

TEST_CASE("identical replicates give an all-zero NPS") {
  const Raster img = testing::random_raster(64, 64, 1, 1);
  const Curve nps = spd_nps(make_replicate_set({img, img, img}));
  for (double v : nps.value) CHECK(v == 0.0);
  CHECK(nps.kind == CurveKind::NPS);
  CHECK(nps.size() == 33);
}

TEST_CASE("replicate sets need at least two equal-size luminance images") {
  CHECK_THROWS_AS(spd_nps(make_replicate_set({Raster(32, 32, 1)})), Error);
  CHECK_THROWS_AS(spd_nps(make_replicate_set({Raster(32, 32, 1), Raster(32, 30, 1)})), Error);
  CHECK_THROWS_AS(spd_nps(make_replicate_set({Raster(32, 30, 1), Raster(32, 30, 1)})), Error);
}

TEST_CASE("white-noise NPS recovers sigma^2 with the n/(n-1) correction") {
  const double sigma = 0.02;
  const Curve nps = spd_nps(white_noise_set(Raster(256, 256, 1, 0.5), sigma, 10, 7));
  double sum = 0.0;
  for (std::size_t k = 1; k < nps.size(); ++k) sum += nps.value[k];
  CHECK(sum / (nps.size() - 1) == doctest::Approx(sigma * sigma).epsilon(0.05));

  // Two replicates: without the correction the estimate would be halved.
  const Curve two = spd_nps(white_noise_set(Raster(256, 256, 1, 0.5), sigma, 2, 8));
  double s2 = 0.0;
  for (std::size_t k = 1; k < two.size(); ++k) s2 += two.value[k];
  CHECK(s2 / (two.size() - 1) == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("adding a constant to every replicate leaves the NPS bit-identical") {
  // Dyadic samples keep every sum exact, so equality must be exact.
  Rng rng(3);
  std::vector<Raster> reps, shifted;
  for (int i = 0; i < 8; ++i) {
    Raster r(32, 32, 1);
    for (double& v : r.data()) v = std::floor(rng.uniform(0.0, 64.0)) / 256.0;
    Raster s = r;
    for (double& v : s.data()) v += 0.25;
    reps.push_back(std::move(r));
    shifted.push_back(std::move(s));
  }
  CHECK(spd_nps(make_replicate_set(reps)) == spd_nps(make_replicate_set(shifted)));
}

TEST_CASE("output equal to input with zero noise gives MTF 1") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(256, 2));
  const ReplicateSet rs = make_replicate_set({chart, chart});
  const MtfResult m = spd_mtf(chart, rs, spd_nps(rs));
  for (std::size_t k = 0; k < m.mtf.size(); ++k) {
    if (m.mtf.is_valid(k)) CHECK(m.mtf.value[k] == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(m.clamped_bins == 0);
  CHECK(m.mtf.kind == CurveKind::MTF);
}

TEST_CASE("blur-only pipeline: SPD-MTF matches the Gaussian MTF") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(256, 5));
  PipelineConfig cfg = noise_free();
  cfg.blur_sigma = 1.0;
  const ReplicateSet rs = capture_replicates(chart, cfg, Stage::Blur, 2);
  const MtfResult m = spd_mtf(chart, rs, spd_nps(rs));
  for (std::size_t k = 0; k < m.mtf.size(); ++k) {
    const double u = m.mtf.frequency[k];
    if (u < 0.05 || u > 0.35) continue;
    REQUIRE(m.mtf.is_valid(k));
    CHECK(std::abs(m.mtf.value[k] - std::exp(-2 * std::numbers::pi * std::numbers::pi * u * u)) < 0.05);
  }
}

TEST_CASE("spd_mtf does not depend on replicate order") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(192, 6));
  PipelineConfig cfg;
  cfg.seed = 4;
  ReplicateSet rs = capture_replicates(chart, cfg, Stage::Sharpen, 4);
  const Curve nps = spd_nps(rs);
  const MtfResult a = spd_mtf(chart, rs, nps);
  std::reverse(rs.replicates.begin(), rs.replicates.end());
  const MtfResult b = spd_mtf(chart, rs, nps);
  for (std::size_t k = 0; k < a.mtf.size(); ++k) {
    CHECK(a.mtf.is_valid(k) == b.mtf.is_valid(k));
    CHECK(a.mtf.value[k] == doctest::Approx(b.mtf.value[k]).epsilon(1e-12));
  }
}

TEST_CASE("negative noise-corrected power is clamped and counted") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(192, 7));
  const ReplicateSet rs = make_replicate_set({chart, chart});
  // A large fake noise curve drives every bin negative.
  Curve huge = spd_nps(rs);
  for (double& v : huge.value) v = 1e6;
  const MtfResult m = spd_mtf(chart, rs, huge);
  CHECK(m.clamped_bins > 0);
  for (double v : m.mtf.value) CHECK(v >= 0.0);
}

TEST_CASE("bins with negligible input power are flagged, not divided") {
  // Low-pass the input hard so high-frequency input power is tiny.
  const Raster chart = lens_blur(generate_dead_leaves(default_dead_leaves(192, 8)), 6.0);
  const ReplicateSet rs = make_replicate_set({chart, chart});
  const MtfResult m = spd_mtf(chart, rs, spd_nps(rs));
  CHECK(m.flagged_bins > 0);
  CHECK(m.flagged_bins == m.mtf.invalid_count());
  CHECK_FALSE(m.mtf.is_valid(m.mtf.size() - 1));
}

TEST_CASE("grid and dimension mismatches are errors") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(192, 9));
  const ReplicateSet rs = make_replicate_set({chart, chart});
  CHECK_THROWS_AS(spd_mtf(chart, rs, make_curve(CurveKind::NPS, 256, std::vector<double>(129))), Error);
  CHECK_THROWS_AS(spd_mtf(generate_uniform_patch(160, 0.5), rs, spd_nps(rs)), Error);
}

TEST_CASE("noise-free identity pipeline: every measure is trivial") {
  PipelineConfig cfg = noise_free();
  cfg.blur_sigma = 0.0;
  const Raster chart = generate_dead_leaves(default_dead_leaves(192, 10));
  const ReplicateSet rs = capture_replicates(chart, cfg, Stage::Levels, 3);
  const Curve nps = spd_nps(rs);
  for (double v : nps.value) CHECK(v == 0.0);
  const Curve u = uniform_patch_nps(cfg, 0.5, 3, 192, Stage::Levels);
  for (double v : u.value) CHECK(v == 0.0);
  for (const MtfResult& m : {spd_mtf(chart, rs, nps), direct_dead_leaves_mtf(chart, rs, u)}) {
    for (std::size_t k = 0; k < m.mtf.size(); ++k) {
      if (m.mtf.is_valid(k)) CHECK(m.mtf.value[k] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  const SceneMeasurement sm = measure_scene(chart, cfg, Stage::Levels, 3);
  for (double v : sm.nps.value) CHECK(v == 0.0);
}

TEST_CASE("measure_scene on a uniform patch reduces to uniform_patch_nps") {
  PipelineConfig cfg;
  cfg.seed = 12;
  const SceneMeasurement m = measure_scene(generate_uniform_patch(192, 0.4), cfg, Stage::Sharpen, 4);
  CHECK(m.nps == uniform_patch_nps(cfg, 0.4, 4, 192));
}

TEST_CASE("noise-free linear pipeline: MTF does not depend on the scene") {
  PipelineConfig cfg = noise_free();
  std::vector<Curve> mtfs;
  const auto scenes = generate_synthetic_scene_set(5, 256, 31);
  for (const auto& s : scenes) mtfs.push_back(measure_scene(s, cfg, Stage::Sharpen, 2).mtf.mtf);
  for (std::size_t k = 0; k < mtfs[0].size(); ++k) {
    bool all_valid = true;
    double lo = 1e9, hi = -1e9;
    for (const auto& c : mtfs) {
      all_valid = all_valid && c.is_valid(k);
      lo = std::min(lo, c.value[k]);
      hi = std::max(hi, c.value[k]);
    }
    if (all_valid) CHECK(hi - lo < 0.02);
  }
}

TEST_CASE("windowed noise fraction equals the mean squared weight for stationary noise") {
  const ReplicateSet rs = white_noise_set(Raster(192, 192, 1, 0.5), 0.01, 6, 2);
  const WindowMask mask = make_window(192, 192, 0.5);
  CHECK(windowed_noise_fraction(rs, mask) == doctest::Approx(mask.mean_square_weight()).epsilon(0.03));
}

TEST_CASE("ensemble: hand arithmetic, identical members, oracle agreement") {
  const Curve a = make_curve(CurveKind::MTF, 16, std::vector<double>(9, 0.2));
  const Curve b = make_curve(CurveKind::MTF, 16, std::vector<double>(9, 0.4));
  const CurveEnsemble e = ensemble(std::vector<Curve>{a, b});
  CHECK(e.mean.value[3] == doctest::Approx(0.3));
  CHECK(e.stddev.value[3] == doctest::Approx(0.1));

  // Plain two-pass double arithmetic: exact for a power-of-two count,
  // last-ulp for three.
  const CurveEnsemble four = ensemble(std::vector<Curve>{a, a, a, a});
  CHECK(four.mean.value == a.value);
  for (double v : four.stddev.value) CHECK(v == 0.0);
  const CurveEnsemble same = ensemble(std::vector<Curve>{a, a, a});
  for (double v : same.mean.value) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  for (double v : same.stddev.value) CHECK(v <= 1e-16);

  Rng rng(5);
  std::vector<Curve> curves;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 7; ++i) {
    std::vector<double> v(9);
    for (double& x : v) x = rng.normal();
    rows.push_back(v);
    curves.push_back(make_curve(CurveKind::NPS, 16, v));
  }
  const CurveEnsemble r = ensemble(curves);
  const auto ref = oracle::mean_stddev(rows);
  CHECK(r.mean.value == ref.mean);
  CHECK(r.stddev.value == ref.stddev);
}

TEST_CASE("ensemble invalidity and errors") {
  Curve a = make_curve(CurveKind::MTF, 16, std::vector<double>(9, 0.2));
  Curve b = a;
  b.valid[4] = 0;
  const CurveEnsemble e = ensemble(std::vector<Curve>{a, b});
  CHECK_FALSE(e.mean.is_valid(4));
  CHECK_FALSE(e.stddev.is_valid(4));
  CHECK(e.mean.is_valid(3));
  CHECK_THROWS_AS(ensemble(std::vector<Curve>{a}), Error);
  CHECK_THROWS_AS(ensemble(std::vector<Curve>{a, make_curve(CurveKind::MTF, 32, std::vector<double>(17))}), Error);
}

TEST_CASE("capturing several taps in one pass equals capturing them separately") {
  const Raster chart = generate_dead_leaves(default_dead_leaves(64, 3));
  PipelineConfig cfg;
  cfg.variant = PipelineVariant::Nonlinear;
  cfg.seed = 2;
  const Stage taps[] = {Stage::Demosaic, Stage::Sharpen};
  const auto sets = capture_replicates(chart, cfg, taps, 3);
  for (int t = 0; t < 2; ++t) {
    const ReplicateSet single = capture_replicates(chart, cfg, taps[t], 3);
    for (int i = 0; i < 3; ++i) CHECK(sets[t].replicates[i] == single.replicates[i]);
  }
}
