#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "spdchar/raster.hpp"

namespace spdchar {

enum class PipelineVariant { Linear, Nonlinear };

/// Extraction points, in execution order.
enum class Stage {
  Input,
  Blur,
  PhotonNoise,
  DarkNoise,
  Levels,
  Cfa,
  Demosaic,
  Denoise,
  Sharpen,
};

inline constexpr std::array kAllStages = {Stage::Input,    Stage::Blur,    Stage::PhotonNoise,
                                          Stage::DarkNoise, Stage::Levels, Stage::Cfa,
                                          Stage::Demosaic, Stage::Denoise, Stage::Sharpen};

std::string_view to_string(Stage stage);
std::string_view to_string(PipelineVariant variant);
/// Accepts every stage name plus "end" for the final stage.
Stage parse_stage(std::string_view name);
PipelineVariant parse_variant(std::string_view name);

struct PipelineConfig {
  static constexpr int kSchemaVersion = 1;

  PipelineVariant variant = PipelineVariant::Linear;
  double blur_sigma = 0.85;
  double snr_at_saturation = 40.0;
  std::array<double, 3> channel_noise_scale{2.0, 1.0, 3.3};
  double dark_sigma_coeff = 0.05;
  bool photon_noise = true;
  bool dark_noise = true;
  /// Unset levels default to 3 dark-noise sigmas from either end.
  std::optional<double> black_level;
  std::optional<double> white_level;
  std::string cfa = "grbg";

  // Linear stage parameters.
  double denoise_sigma = 0.6;
  double sharpen_amount = 0.8;
  double sharpen_radius = 1.0;
  // Nonlinear stage parameters.
  double denoise_strength = 1.0;
  int guided_radius = 2;
  double guided_epsilon = 0.01;
  double guided_amount = 1.0;

  std::uint64_t seed = 0;
  int replicate_index = 0;

  /// Dark noise sigma actually applied (0 when dark noise is off).
  double dark_sigma() const noexcept;
  double effective_black_level() const noexcept;
  double effective_white_level() const noexcept;
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

/// Gaussian approximation of the Airy central lobe: sigma = 0.42 * lambda * N,
/// expressed in pixels.
double blur_sigma_from_optics(double f_number, double wavelength_um, double pixel_pitch_um);

/// Noise stream for a given stage of a given replicate.
std::uint64_t stage_seed(std::uint64_t seed, int replicate_index, Stage stage) noexcept;

Raster lens_blur(const Raster& img, double sigma);

/// Poisson shot noise with mean count t * snr^2, rescaled by 1/snr^2, then the
/// zero-mean residual of channel c is multiplied by channel_scale[c].
Raster add_photon_noise(const Raster& img, double snr_at_saturation,
                        std::span<const double> channel_scale, std::uint64_t seed);

/// Additive Gaussian noise of sigma dark_sigma_coeff / snr_at_saturation.
Raster add_dark_noise(const Raster& img, double snr_at_saturation, double dark_sigma_coeff,
                      std::uint64_t seed);

Raster level_adjust(const Raster& img, double black_level, double white_level);

/// Colour index (0 = R, 1 = G, 2 = B) of mosaic site (x, y) for a Bayer pattern
/// string such as "grbg" (row-major 2x2 tile).
int cfa_color(std::string_view pattern, int x, int y);
void validate_cfa_pattern(std::string_view pattern);

Raster cfa_sample(const Raster& img, std::string_view pattern = "grbg");

/// Malvar-He-Cutler 5x5 linear demosaicing.
Raster demosaic_linear(const Raster& mosaic, std::string_view pattern = "grbg");

/// Gradient-directed green interpolation followed by bilinear colour-difference
/// filling of red and blue.
Raster demosaic_adaptive(const Raster& mosaic, std::string_view pattern = "grbg");

Raster denoise_linear(const Raster& img, double sigma);

/// Cross-bilateral filter. Range distances are measured on a Gaussian-smoothed
/// (sigma 1) luminance guide and the range sigma follows the guide's
/// tile-local noise estimate: range sigma = 2 * strength * local noise sigma.
/// Flat regions are averaged hard; edges above the noise floor survive.
Raster denoise_adaptive(const Raster& img, double strength);

/// Robust per-tile noise sigma (median absolute Laplacian residual), bilinearly
/// interpolated to every pixel.
std::vector<double> local_noise_sigma(std::span<const double> plane, int width, int height,
                                      int tile = 32);

/// Unsharp mask: in + amount * (in - gaussian(in, radius)).
Raster sharpen_linear(const Raster& img, double amount, double radius);

/// Per channel: in + amount * (in - q), q the self-guided filter output.
Raster sharpen_guided(const Raster& img, int radius, double epsilon, double amount);

using StageObserver = std::function<void(Stage, const Raster&)>;

/// Runs the capture pipeline on `scene` (1-channel scenes are replicated to
/// RGB) and returns the image after `tap`. The observer, if given, sees the
/// output of every executed stage in order.
Raster run_pipeline(const Raster& scene, const PipelineConfig& cfg, Stage tap = Stage::Sharpen,
                    const StageObserver& observer = {});

}  // namespace spdchar
