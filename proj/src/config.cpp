#include "spdchar/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdchar/error.hpp"

namespace spdchar {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error("invalid_config",
              "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double v = std::stod(text, &used);
    if (used != text.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "schema_version") {
    if (parse_int<int>(key, value) != PipelineConfig::kSchemaVersion) {
      throw Error("invalid_config", "unsupported schema_version " + std::string(value));
    }
  } else if (key == "variant") {
    cfg.variant = parse_variant(value);
  } else if (key == "blur_sigma") {
    cfg.blur_sigma = parse_real(key, value);
  } else if (key == "snr_at_saturation") {
    cfg.snr_at_saturation = parse_real(key, value);
  } else if (key == "channel_noise_scale") {
    std::size_t start = 0;
    for (int c = 0; c < 3; ++c) {
      const auto comma = value.find(',', start);
      if ((c < 2) == (comma == std::string_view::npos)) bad_value(key, value);
      cfg.channel_noise_scale[c] = parse_real(key, trim(value.substr(start, comma - start)));
      start = comma + 1;
    }
  } else if (key == "dark_sigma_coeff") {
    cfg.dark_sigma_coeff = parse_real(key, value);
  } else if (key == "photon_noise") {
    cfg.photon_noise = parse_bool(key, value);
  } else if (key == "dark_noise") {
    cfg.dark_noise = parse_bool(key, value);
  } else if (key == "black_level") {
    cfg.black_level = value == "auto" ? std::nullopt : std::optional(parse_real(key, value));
  } else if (key == "white_level") {
    cfg.white_level = value == "auto" ? std::nullopt : std::optional(parse_real(key, value));
  } else if (key == "cfa") {
    validate_cfa_pattern(value);
    cfg.cfa = std::string(value);
  } else if (key == "denoise_sigma") {
    cfg.denoise_sigma = parse_real(key, value);
  } else if (key == "sharpen_amount") {
    cfg.sharpen_amount = parse_real(key, value);
  } else if (key == "sharpen_radius") {
    cfg.sharpen_radius = parse_real(key, value);
  } else if (key == "denoise_strength") {
    cfg.denoise_strength = parse_real(key, value);
  } else if (key == "guided_radius") {
    cfg.guided_radius = parse_int<int>(key, value);
  } else if (key == "guided_epsilon") {
    cfg.guided_epsilon = parse_real(key, value);
  } else if (key == "guided_amount") {
    cfg.guided_amount = parse_real(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "replicate_index") {
    cfg.replicate_index = parse_int<int>(key, value);
  } else {
    throw Error("invalid_config", "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  bool saw_version = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error("invalid_config", "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    apply_config_value(cfg, key, trim(line.substr(eq + 1)));
    saw_version = saw_version || key == "schema_version";
  }
  if (!saw_version) throw Error("invalid_config", "config is missing schema_version");
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::string config_body(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "schema_version = " << PipelineConfig::kSchemaVersion << '\n'
      << "variant = " << to_string(cfg.variant) << '\n'
      << "blur_sigma = " << fmt(cfg.blur_sigma) << '\n'
      << "snr_at_saturation = " << fmt(cfg.snr_at_saturation) << '\n'
      << "channel_noise_scale = " << fmt(cfg.channel_noise_scale[0]) << ", "
      << fmt(cfg.channel_noise_scale[1]) << ", " << fmt(cfg.channel_noise_scale[2]) << '\n'
      << "dark_sigma_coeff = " << fmt(cfg.dark_sigma_coeff) << '\n'
      << "photon_noise = " << (cfg.photon_noise ? "true" : "false") << '\n'
      << "dark_noise = " << (cfg.dark_noise ? "true" : "false") << '\n'
      << "black_level = " << (cfg.black_level ? fmt(*cfg.black_level) : "auto") << '\n'
      << "white_level = " << (cfg.white_level ? fmt(*cfg.white_level) : "auto") << '\n'
      << "cfa = " << cfg.cfa << '\n'
      << "denoise_sigma = " << fmt(cfg.denoise_sigma) << '\n'
      << "sharpen_amount = " << fmt(cfg.sharpen_amount) << '\n'
      << "sharpen_radius = " << fmt(cfg.sharpen_radius) << '\n'
      << "denoise_strength = " << fmt(cfg.denoise_strength) << '\n'
      << "guided_radius = " << cfg.guided_radius << '\n'
      << "guided_epsilon = " << fmt(cfg.guided_epsilon) << '\n'
      << "guided_amount = " << fmt(cfg.guided_amount) << '\n';
  return out.str();
}

}  // namespace

std::string to_config_text(const PipelineConfig& cfg) {
  return config_body(cfg) + "seed = " + std::to_string(cfg.seed) + "\n" +
         "replicate_index = " + std::to_string(cfg.replicate_index) + "\n";
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path.string() + " for writing");
  out << to_config_text(cfg);
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_body(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace spdchar
