#pragma once

// Minimal self-contained SVG line plots. Output depends only on the input
// numbers, so generated files are stable enough to diff.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fsbcp::studio {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<double> y_min;
  std::optional<double> y_max;
};

namespace detail {

inline std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

inline std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

[[nodiscard]] inline std::string line_plot_svg(const PlotSpec& spec) {
  constexpr double width = 640, height = 400;
  constexpr double left = 70, right = 150, top = 40, bottom = 55;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : spec.series) {
    for (double v : s.x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    for (double v : s.y)
      if (std::isfinite(v)) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1;
  if (!std::isfinite(y_lo)) y_lo = 0, y_hi = 1;
  if (spec.y_min) y_lo = *spec.y_min;
  if (spec.y_max) y_hi = *spec.y_max;
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) y_hi = y_lo + 1;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };
  using detail::fmt;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, 0) + "\" height=\"" + fmt(height, 0) +
         "\" viewBox=\"0 0 " + fmt(width, 0) + " " + fmt(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape_xml(spec.title) + "</text>\n";
  out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(plot_w) + "\" height=\"" +
         fmt(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    out += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(top + plot_h) + "\" x2=\"" + fmt(px(xv)) + "\" y2=\"" +
           fmt(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(top + plot_h + 18) + "\" text-anchor=\"middle\">" +
           detail::tick_label(xv) + "</text>\n";
    out += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
           fmt(py(yv)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" +
           detail::tick_label(yv) + "</text>\n";
  }
  out += "<text x=\"" + fmt(left + plot_w / 2) + "\" y=\"" + fmt(height - 12) + "\" text-anchor=\"middle\">" +
         detail::escape_xml(spec.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + fmt(top + plot_h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::escape_xml(spec.y_label) + "</text>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& series = spec.series[s];
    const char* color = colors[s % (sizeof colors / sizeof *colors)];
    std::string points;
    for (std::size_t i = 0; i < std::min(series.x.size(), series.y.size()); ++i) {
      if (!std::isfinite(series.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += fmt(px(series.x[i])) + "," + fmt(py(std::clamp(series.y[i], y_lo, y_hi)));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + fmt(left + plot_w + 12) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(left + plot_w + 32) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(left + plot_w + 38) + "\" y=\"" + fmt(ly) + "\">" + detail::escape_xml(series.name) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace fsbcp::studio
