#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "causalreg/errors.hpp"
#include "causalreg/table.hpp"

namespace causalreg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 480;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline double axis_transform(double v, bool log_scale) {
  if (!log_scale) return v;
  if (!(v > 0.0)) throw InvalidInput("log-scale axis requires positive values");
  return std::log10(v);
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace detail

/// Renders a standalone SVG line chart, one polyline per series. Output is a
/// pure function of the inputs.
inline std::string render_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  std::size_t total_points = 0;
  for (const auto& s : series) total_points += s.points.size();
  if (series.empty() || total_points == 0) throw EmptyTable("render_svg: nothing to plot");

  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [px, py] : s.points) {
      const double tx = detail::axis_transform(px, spec.log_x);
      const double ty = detail::axis_transform(py, spec.log_y);
      if (first) {
        x_min = x_max = tx;
        y_min = y_max = ty;
        first = false;
      } else {
        x_min = std::min(x_min, tx);
        x_max = std::max(x_max, tx);
        y_min = std::min(y_min, ty);
        y_max = std::max(y_max, ty);
      }
    }
  }
  if (x_max - x_min < 1e-12) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  }

  const double ml = 64, mr = 18, mt = 34, mb = 48;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  const auto sx = [&](double tx) { return ml + (tx - x_min) / (x_max - x_min) * pw; };
  const auto sy = [&](double ty) { return mt + ph - (ty - y_min) / (y_max - y_min) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  os << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << spec.title << "</text>\n";

  // axes
  os << "<line x1=\"" << detail::fmt2(ml) << "\" y1=\"" << detail::fmt2(mt + ph) << "\" x2=\""
     << detail::fmt2(ml + pw) << "\" y2=\"" << detail::fmt2(mt + ph)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << detail::fmt2(ml) << "\" y1=\"" << detail::fmt2(mt) << "\" x2=\""
     << detail::fmt2(ml) << "\" y2=\"" << detail::fmt2(mt + ph) << "\" stroke=\"black\"/>\n";

  const int n_ticks = 5;
  for (int t = 0; t < n_ticks; ++t) {
    const double fx = x_min + (x_max - x_min) * t / (n_ticks - 1);
    const double fy = y_min + (y_max - y_min) * t / (n_ticks - 1);
    const double label_x = spec.log_x ? std::pow(10.0, fx) : fx;
    const double label_y = spec.log_y ? std::pow(10.0, fy) : fy;
    os << "<line x1=\"" << detail::fmt2(sx(fx)) << "\" y1=\"" << detail::fmt2(mt + ph)
       << "\" x2=\"" << detail::fmt2(sx(fx)) << "\" y2=\"" << detail::fmt2(mt + ph + 5)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << detail::fmt2(sx(fx)) << "\" y=\"" << detail::fmt2(mt + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
       << format_short(label_x) << "</text>\n";
    os << "<line x1=\"" << detail::fmt2(ml - 5) << "\" y1=\"" << detail::fmt2(sy(fy))
       << "\" x2=\"" << detail::fmt2(ml) << "\" y2=\"" << detail::fmt2(sy(fy))
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << detail::fmt2(ml - 8) << "\" y=\"" << detail::fmt2(sy(fy) + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
       << format_short(label_y) << "</text>\n";
  }
  os << "<text x=\"" << detail::fmt2(ml + pw / 2) << "\" y=\"" << spec.height - 8
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << spec.x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << detail::fmt2(mt + ph / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 14 " << detail::fmt2(mt + ph / 2) << ")\">" << spec.y_label
     << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color =
        detail::kPalette[i % (sizeof(detail::kPalette) / sizeof(detail::kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first_pt = true;
    for (const auto& [px, py] : series[i].points) {
      if (!first_pt) os << ' ';
      first_pt = false;
      os << detail::fmt2(sx(detail::axis_transform(px, spec.log_x))) << ','
         << detail::fmt2(sy(detail::axis_transform(py, spec.log_y)));
    }
    os << "\"/>\n";
    os << "<text x=\"" << detail::fmt2(ml + pw - 4) << "\" y=\""
       << detail::fmt2(mt + 14 + 14 * static_cast<double>(i))
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
       << "\">" << series[i].name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// One series per aggregate metric: x = n, y = the aggregated value.
inline std::vector<Series> aggregate_series(const ResultTable& table,
                                            const std::vector<std::string>& metrics) {
  std::vector<Series> out;
  for (const auto& metric : metrics) {
    std::map<long, double> by_n;
    for (const auto& row : table.rows()) {
      if (row.metric == metric && row.replication == kAggregate) by_n[row.n] = row.value;
    }
    Series s;
    s.name = metric;
    for (const auto& [n, v] : by_n) s.points.emplace_back(static_cast<double>(n), v);
    if (!s.points.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace causalreg
