#pragma once

// Dependency-free SVG line/bar charts for run reports. Output is a pure
// function of the input data (fixed palette, snprintf formatting), so
// re-rendering a run reproduces the file byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedgat {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 760;
  int height = 480;
};

namespace detail {

inline const char* chart_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % (sizeof palette / sizeof palette[0])];
}

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
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

// Round-number ticks covering [lo, hi] with ~target steps (1-2-5 ladder).
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) throw std::invalid_argument("nice_ticks: empty range");
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + step * 1e-9; t += step) ticks.push_back(t == 0.0 ? 0.0 : t);
  return ticks;
}

}  // namespace detail

inline std::string render_line_chart(const ChartSpec& spec) {
  if (spec.series.empty()) throw std::invalid_argument("render_line_chart: no series");
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (first) throw std::invalid_argument("render_line_chart: no points");
  auto pad = [](double& lo, double& hi) {
    if (hi == lo) {
      const double p = hi == 0.0 ? 1.0 : std::abs(hi) * 0.1;
      lo -= p;
      hi += p;
    }
  };
  pad(xmin, xmax);
  pad(ymin, ymax);

  const int ml = 70, mr = 20, mt = 40, mb = 55;  // margins
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::fmt(spec.width / 2.0, "%.1f") +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + detail::xml_escape(spec.title) +
         "</text>\n";

  for (double t : detail::nice_ticks(xmin, xmax)) {
    const std::string x = detail::fmt(px(t), "%.2f");
    svg += "<line x1=\"" + x + "\" y1=\"" + detail::fmt(mt + ph, "%.2f") + "\" x2=\"" + x +
           "\" y2=\"" + detail::fmt((double)mt, "%.2f") + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + detail::fmt(mt + ph + 18, "%.2f") +
           "\" text-anchor=\"middle\" font-size=\"11\">" + detail::fmt(t) + "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax)) {
    const std::string y = detail::fmt(py(t), "%.2f");
    svg += "<line x1=\"" + detail::fmt((double)ml, "%.2f") + "\" y1=\"" + y + "\" x2=\"" +
           detail::fmt(ml + pw, "%.2f") + "\" y2=\"" + y + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::fmt(ml - 6.0, "%.2f") + "\" y=\"" + y +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-size=\"11\">" +
           detail::fmt(t) + "</text>\n";
  }
  svg += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) + "\" width=\"" +
         detail::fmt(pw, "%.2f") + "\" height=\"" + detail::fmt(ph, "%.2f") +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + detail::fmt(ml + pw / 2, "%.1f") + "\" y=\"" +
         detail::fmt(spec.height - 12.0, "%.1f") + "\" text-anchor=\"middle\" font-size=\"13\">" +
         detail::xml_escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + detail::fmt(mt + ph / 2, "%.1f") +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
         detail::fmt(mt + ph / 2, "%.1f") + ")\">" + detail::xml_escape(spec.y_label) +
         "</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    if (s.points.empty()) continue;
    std::string path = "<polyline fill=\"none\" stroke=\"";
    path += detail::chart_color(i);
    path += "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : s.points)
      path += detail::fmt(px(x), "%.2f") + "," + detail::fmt(py(y), "%.2f") + " ";
    path += "\"/>\n";
    svg += path;
    for (const auto& [x, y] : s.points)
      svg += "<circle cx=\"" + detail::fmt(px(x), "%.2f") + "\" cy=\"" +
             detail::fmt(py(y), "%.2f") + "\" r=\"2.4\" fill=\"" + detail::chart_color(i) +
             "\"/>\n";
  }

  if (spec.series.size() > 1 || !spec.series.front().label.empty()) {
    double ly = mt + 10.0;
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
      const double lx = ml + pw - 150.0;
      svg += "<line x1=\"" + detail::fmt(lx, "%.2f") + "\" y1=\"" + detail::fmt(ly, "%.2f") +
             "\" x2=\"" + detail::fmt(lx + 24, "%.2f") + "\" y2=\"" + detail::fmt(ly, "%.2f") +
             "\" stroke=\"" + detail::chart_color(i) + "\" stroke-width=\"1.8\"/>\n";
      svg += "<text x=\"" + detail::fmt(lx + 30, "%.2f") + "\" y=\"" + detail::fmt(ly, "%.2f") +
             "\" dominant-baseline=\"middle\" font-size=\"12\">" +
             detail::xml_escape(spec.series[i].label) + "</text>\n";
      ly += 18.0;
    }
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string render_bar_chart(const std::string& title, const std::string& y_label,
                                    const std::vector<std::pair<std::string, double>>& bars,
                                    int width = 760, int height = 480) {
  if (bars.empty()) throw std::invalid_argument("render_bar_chart: no bars");
  double ymax = 0.0;
  for (const auto& [_, v] : bars) {
    if (v < 0.0) throw std::invalid_argument("render_bar_chart: negative value");
    ymax = std::max(ymax, v);
  }
  if (ymax == 0.0) ymax = 1.0;

  const int ml = 80, mr = 20, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double slot = pw / static_cast<double>(bars.size());

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::fmt(width / 2.0, "%.1f") +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + detail::xml_escape(title) +
         "</text>\n";
  for (double t : detail::nice_ticks(0.0, ymax)) {
    const double y = mt + ph - t / ymax * ph;
    svg += "<line x1=\"" + detail::fmt((double)ml, "%.2f") + "\" y1=\"" + detail::fmt(y, "%.2f") +
           "\" x2=\"" + detail::fmt(ml + pw, "%.2f") + "\" y2=\"" + detail::fmt(y, "%.2f") +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::fmt(ml - 6.0, "%.2f") + "\" y=\"" + detail::fmt(y, "%.2f") +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-size=\"11\">" +
           detail::fmt(t) + "</text>\n";
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double h = bars[i].second / ymax * ph;
    const double x = ml + slot * (static_cast<double>(i) + 0.2);
    svg += "<rect x=\"" + detail::fmt(x, "%.2f") + "\" y=\"" + detail::fmt(mt + ph - h, "%.2f") +
           "\" width=\"" + detail::fmt(slot * 0.6, "%.2f") + "\" height=\"" +
           detail::fmt(h, "%.2f") + "\" fill=\"" + detail::chart_color(i) + "\"/>\n";
    svg += "<text x=\"" + detail::fmt(x + slot * 0.3, "%.2f") + "\" y=\"" +
           detail::fmt(mt + ph + 18.0, "%.2f") + "\" text-anchor=\"middle\" font-size=\"12\">" +
           detail::xml_escape(bars[i].first) + "</text>\n";
    svg += "<text x=\"" + detail::fmt(x + slot * 0.3, "%.2f") + "\" y=\"" +
           detail::fmt(mt + ph - h - 6.0, "%.2f") + "\" text-anchor=\"middle\" font-size=\"11\">" +
           detail::fmt(bars[i].second) + "</text>\n";
  }
  svg += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) + "\" width=\"" +
         detail::fmt(pw, "%.2f") + "\" height=\"" + detail::fmt(ph, "%.2f") +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"18\" y=\"" + detail::fmt(mt + ph / 2, "%.1f") +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
         detail::fmt(mt + ph / 2, "%.1f") + ")\">" + detail::xml_escape(y_label) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace fedgat
