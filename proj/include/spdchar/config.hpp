#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "spdchar/pipeline.hpp"

namespace spdchar {

// Pipeline configuration files are plain `key = value` lines; `#` starts a
// comment. Every file must carry `schema_version = 1`. Keys not present keep
// their defaults. Recognized keys:
//
//   schema_version      1
//   variant             linear | nonlinear
//   blur_sigma          pixels
//   snr_at_saturation   real > 0
//   channel_noise_scale three comma-separated reals (R, G, B)
//   dark_sigma_coeff    real >= 0
//   photon_noise        true | false
//   dark_noise          true | false
//   black_level         [0, 1) or "auto"
//   white_level         (black, 1] or "auto"
//   cfa                 grbg | rggb | gbrg | bggr
//   denoise_sigma       linear Gaussian denoiser sigma
//   sharpen_amount      unsharp mask amount
//   sharpen_radius      unsharp mask Gaussian sigma
//   denoise_strength    adaptive bilateral strength
//   guided_radius       guided filter box radius
//   guided_epsilon      guided filter regularizer
//   guided_amount       guided sharpening gain
//   seed                unsigned 64-bit
//   replicate_index     integer >= 0

/// Applies one key/value assignment; throws on unknown keys or bad values.
void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

/// FNV-1a 64 of the canonical text with seed and replicate index excluded, so
/// replicates of one configuration share a hash.
std::uint64_t config_hash(const PipelineConfig& cfg);

}  // namespace spdchar
