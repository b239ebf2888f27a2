#include <doctest.h>

#include <filesystem>

#include "spdchar/config.hpp"
#include "spdchar/error.hpp"

using namespace spdchar;

TEST_CASE("config text round trip preserves every field") {
  PipelineConfig cfg;
  cfg.variant = PipelineVariant::Nonlinear;
  cfg.blur_sigma = 1.25;
  cfg.snr_at_saturation = 5.0;
  cfg.channel_noise_scale = {1.5, 1.0, 2.5};
  cfg.dark_sigma_coeff = 0.1;
  cfg.photon_noise = false;
  cfg.black_level = 0.01;
  cfg.white_level = 0.97;
  cfg.cfa = "bggr";
  cfg.denoise_sigma = 0.7;
  cfg.guided_radius = 3;
  cfg.guided_epsilon = 1.0 / 3.0;
  cfg.seed = 18446744073709551615ULL;
  cfg.replicate_index = 4;
  CHECK(parse_config(to_config_text(cfg)) == cfg);
  CHECK(parse_config(to_config_text(PipelineConfig{})) == PipelineConfig{});
}

TEST_CASE("config parsing: comments, auto levels, overrides of defaults") {
  const PipelineConfig cfg = parse_config(
      "# comment\n"
      "schema_version = 1\n"
      "variant = nonlinear   # trailing comment\n"
      "snr_at_saturation = 10\n"
      "black_level = auto\n"
      "channel_noise_scale = 1, 2, 3\n");
  CHECK(cfg.variant == PipelineVariant::Nonlinear);
  CHECK(cfg.snr_at_saturation == 10.0);
  CHECK_FALSE(cfg.black_level.has_value());
  CHECK(cfg.channel_noise_scale == std::array<double, 3>{1, 2, 3});
  CHECK(cfg.blur_sigma == PipelineConfig{}.blur_sigma);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("variant = linear\n"), Error);               // no schema_version
  CHECK_THROWS_AS(parse_config("schema_version = 2\n"), Error);
  CHECK_THROWS_AS(parse_config("schema_version = 1\ncolour = red\n"), Error);
  CHECK_THROWS_AS(parse_config("schema_version = 1\nblur_sigma = wide\n"), Error);
  CHECK_THROWS_AS(parse_config("schema_version = 1\nblur_sigma\n"), Error);
  CHECK_THROWS_AS(parse_config("schema_version = 1\nsnr_at_saturation = -1\n"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/spdchar.cfg"), Error);
}

TEST_CASE("config hash ignores seed and replicate index only") {
  PipelineConfig a;
  PipelineConfig b = a;
  b.seed = 99;
  b.replicate_index = 3;
  CHECK(config_hash(a) == config_hash(b));
  b.blur_sigma = 0.9;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config file save and load") {
  PipelineConfig cfg;
  cfg.snr_at_saturation = 20;
  const auto path = std::filesystem::temp_directory_path() / "spdchar_test.cfg";
  save_config(cfg, path);
  CHECK(load_config(path) == cfg);
  std::filesystem::remove(path);
}
