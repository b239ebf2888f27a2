#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spdchar/spectral.hpp"

namespace spdchar {

struct PlotSeries {
  const Curve* curve = nullptr;
  std::string label;
  std::string color = "#000000";
  double width = 1.0;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string y_label;
  /// Logarithmic y axis (NPS plots); linear otherwise (MTF plots).
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Renders polylines over 0..0.5 cy/px. Invalid bins, and non-positive values
/// on a log axis, break the line.
std::string render_svg(const PlotSpec& spec);
void write_svg(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace spdchar
