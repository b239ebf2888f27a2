#include "spdchar/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spdchar/error.hpp"

namespace spdchar {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;
constexpr double kMaxFrequency = 0.5;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool plottable(const Curve& c, std::size_t k, bool log_y) {
  return c.is_valid(k) && std::isfinite(c.value[k]) && (!log_y || c.value[k] > 0.0);
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : spec.series) {
    if (s.curve == nullptr) throw Error("invalid_argument", "plot series without a curve");
    for (std::size_t k = 0; k < s.curve->size(); ++k) {
      if (!plottable(*s.curve, k, spec.log_y)) continue;
      lo = std::min(lo, s.curve->value[k]);
      hi = std::max(hi, s.curve->value[k]);
    }
  }
  if (!std::isfinite(lo)) {
    lo = spec.log_y ? 1e-6 : 0.0;
    hi = spec.log_y ? 1.0 : 1.0;
  }

  double y0, y1;
  if (spec.log_y) {
    y0 = std::floor(std::log10(lo));
    y1 = std::ceil(std::log10(hi));
    if (y1 <= y0) y1 = y0 + 1.0;
  } else {
    y0 = std::min(0.0, lo);
    y1 = hi > y0 ? hi * 1.05 : y0 + 1.0;
  }

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double f) { return kLeft + pw * f / kMaxFrequency; };
  auto py = [&](double v) {
    const double t = spec.log_y ? std::log10(v) : v;
    return kTop + ph * (1.0 - (t - y0) / (y1 - y0));
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";

  // Grid and ticks.
  for (int i = 0; i <= 5; ++i) {
    const double f = 0.1 * i;
    o << "<line x1=\"" << fmt(px(f)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px(f))
      << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << fmt(px(f)) << "\" y=\"" << fmt(kTop + ph + 16)
      << "\" text-anchor=\"middle\">" << tick_label(f) << "</text>\n";
  }
  if (spec.log_y) {
    for (double e = y0; e <= y1 + 1e-9; e += 1.0) {
      const double y = kTop + ph * (1.0 - (e - y0) / (y1 - y0));
      o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft + pw)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
      o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double v = y0 + (y1 - y0) * i / 5.0;
      o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(kLeft + pw)
        << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"#dddddd\"/>\n";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(v) + 4)
        << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
  }
  o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw)
    << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 12)
    << "\" text-anchor=\"middle\">frequency (cycles/pixel)</text>\n";
  o << "<text transform=\"translate(18," << fmt(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  int legend_row = 0;
  for (const auto& s : spec.series) {
    const Curve& c = *s.curve;
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
          << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << points
          << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!plottable(c, k, spec.log_y) || c.frequency[k] > kMaxFrequency) {
        flush();
        continue;
      }
      const double y = std::clamp(py(c.value[k]), kTop, kTop + ph);
      points += fmt(px(c.frequency[k])) + "," + fmt(y) + " ";
    }
    flush();
    if (!s.label.empty()) {
      const double ly = kTop + 10 + 18 * legend_row++;
      o << "<line x1=\"" << fmt(kLeft + pw + 10) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(kLeft + pw + 34) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"" << s.width << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "")
        << "/>\n";
      o << "<text x=\"" << fmt(kLeft + pw + 40) << "\" y=\"" << fmt(ly + 4) << "\">"
        << escape(s.label) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const PlotSpec& spec, const std::filesystem::path& path) {
  const std::string text = render_svg(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

}  // namespace spdchar
