#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ltsi {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// Minimal, dependency-free SVG line chart. Non-finite points are skipped by
// breaking the polyline. Output is deterministic for identical input.
inline std::string svg_line_chart(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<PlotSeries>& series,
                                  int width = 860, int height = 520) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const double ml = 72, mr = 24, mt = 48, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::fmt_coord(width / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";

  // axes and ticks
  svg += "<g stroke=\"#444\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + detail::fmt_coord(ml) + "\" y1=\"" +
         detail::fmt_coord(mt + ph) + "\" x2=\"" + detail::fmt_coord(ml + pw) +
         "\" y2=\"" + detail::fmt_coord(mt + ph) + "\"/>\n";
  svg += "<line x1=\"" + detail::fmt_coord(ml) + "\" y1=\"" +
         detail::fmt_coord(mt) + "\" x2=\"" + detail::fmt_coord(ml) +
         "\" y2=\"" + detail::fmt_coord(mt + ph) + "\"/>\n";
  svg += "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double fy = ymin + (ymax - ymin) * i / 4.0;
    svg += "<text x=\"" + detail::fmt_coord(px(fx)) + "\" y=\"" +
           detail::fmt_coord(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" + detail::fmt_tick(fx) + "</text>\n";
    svg += "<text x=\"" + detail::fmt_coord(ml - 6) + "\" y=\"" +
           detail::fmt_coord(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" + detail::fmt_tick(fy) + "</text>\n";
  }
  svg += "<text x=\"" + detail::fmt_coord(ml + pw / 2) + "\" y=\"" +
         detail::fmt_coord(height - 14.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" + x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + detail::fmt_coord(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " +
         detail::fmt_coord(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % 6];
    std::string points;
    auto flush = [&]() {
      if (!points.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += detail::fmt_coord(px(s.x[i])) + "," +
                detail::fmt_coord(py(s.y[i])) + " ";
    }
    flush();
    double ly = mt + 14.0 + 16.0 * si;
    svg += "<line x1=\"" + detail::fmt_coord(ml + pw - 150) + "\" y1=\"" +
           detail::fmt_coord(ly - 4) + "\" x2=\"" +
           detail::fmt_coord(ml + pw - 126) + "\" y2=\"" +
           detail::fmt_coord(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::fmt_coord(ml + pw - 120) + "\" y=\"" +
           detail::fmt_coord(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace ltsi
