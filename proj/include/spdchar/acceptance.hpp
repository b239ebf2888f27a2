#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace spdchar::acceptance {

struct Options {
  /// Reduced image side and scene count for a fast smoke run. Tolerances are
  /// unchanged.
  bool quick = false;
  std::uint64_t seed = 20240601;
  /// Scratch space for the determinism check.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "spdchar_acceptance";
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Human-readable measured value(s) and the threshold they were held to.
  std::string measured;
  std::string threshold;
};

int image_side(const Options& o);

Result gaussian_mtf_oracle(const Options& o);         // 1
Result white_noise_calibration(const Options& o);     // 2
Result photon_noise_scaling(const Options& o);        // 3
Result linear_concordance(const Options& o);          // 4
Result nonlinear_underestimation(const Options& o);   // 5
Result scene_dependency_ordering(const Options& o);   // 6
Result replicate_convergence(const Options& o);       // 7
Result eq4_bias(const Options& o);                    // 8
Result determinism(const Options& o);                 // 9
Result micro_oracles(const Options& o);               // 10

/// Runs criteria 1..10 in order, reporting each as it finishes. A criterion
/// that throws is reported as failed with the error text.
std::vector<Result> run_all(const Options& o, const std::function<void(const Result&)>& on_result = {});

/// "criterion N [PASS|FAIL] name: measured (threshold)".
std::string format(const Result& r);

}  // namespace spdchar::acceptance
