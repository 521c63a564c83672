#include "lplab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lplab/errors.hpp"
#include "lplab/io.hpp"

namespace lplab {
namespace {

constexpr double kWidth = 760.0, kHeight = 520.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 44.0, kBottom = 58.0;

const char* const kPalette[] = {"#1f6fb2", "#d95f02", "#1b9e77", "#7570b3",
                                "#e7298a", "#66a61e", "#a6761d", "#666666"};

std::string fmt(const char* pattern, double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

bool plottable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0.0);
}

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;  // in plot units (log10 when log)

  double unit(double v) const { return log ? std::log10(v) : v; }
  // Normalized [0,1] position; callers map to pixels.
  double frac(double v) const { return (unit(v) - lo) / (hi - lo); }

  void fit(double min_u, double max_u) {
    if (max_u - min_u < 1e-12) {
      min_u -= log ? 0.5 : (std::abs(min_u) * 0.5 + 0.5);
      max_u += log ? 0.5 : (std::abs(max_u) * 0.5 + 0.5);
    }
    const double pad = 0.05 * (max_u - min_u);
    lo = min_u - pad;
    hi = max_u + pad;
  }

  std::vector<double> ticks() const {  // tick values in data units
    std::vector<double> out;
    if (log) {
      const int d0 = static_cast<int>(std::ceil(lo - 1e-9));
      const int d1 = static_cast<int>(std::floor(hi + 1e-9));
      for (int d = d0; d <= d1; ++d) out.push_back(std::pow(10.0, d));
      if (out.size() < 2) {  // narrow range: fall back to 1-2-5 mantissa ticks
        out.clear();
        for (int d = d0 - 1; d <= d1 + 1; ++d)
          for (double m : {1.0, 2.0, 5.0}) {
            const double v = m * std::pow(10.0, d);
            const double u = std::log10(v);
            if (u >= lo - 1e-9 && u <= hi + 1e-9) out.push_back(v);
          }
      }
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 1e-9 * span; v += step) out.push_back(v);
    return out;
  }
};

}  // namespace

std::string render_plot_svg(const PlotSpec& spec) {
  Axis ax{spec.log_x}, ay{spec.log_y};
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  std::size_t points = 0;
  for (const auto& s : spec.series) {
    require(s.x.size() == s.y.size(), ErrorCode::InvalidArgument,
            "plot series \"" + s.label + "\": x and y must have equal length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!plottable(s.x[i], spec.log_x) || !plottable(s.y[i], spec.log_y)) continue;
      min_x = std::min(min_x, ax.unit(s.x[i]));
      max_x = std::max(max_x, ax.unit(s.x[i]));
      min_y = std::min(min_y, ay.unit(s.y[i]));
      max_y = std::max(max_y, ay.unit(s.y[i]));
      ++points;
    }
  }
  require(points > 0, ErrorCode::InvalidArgument,
          "plot \"" + spec.title + "\" has no plottable samples");
  ax.fit(min_x, max_x);
  ay.fit(min_y, max_y);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + pw * ax.frac(v); };
  auto py = [&](double v) { return kTop + ph * (1.0 - ay.frac(v)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%g", kWidth) +
         "\" height=\"" + fmt("%g", kHeight) + "\" viewBox=\"0 0 " + fmt("%g", kWidth) + " " +
         fmt("%g", kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape(spec.title) + "</text>\n";

  for (double v : ax.ticks()) {
    const double x = px(v);
    svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" +
           fmt("%.2f", x) + "\" y2=\"" + fmt("%.2f", kTop + ph) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt("%.3g", v) + "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double y = py(v);
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
           fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt("%.3g", v) + "</text>\n";
  }
  svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt("%.2f", kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
         fmt("%.2f", kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  std::size_t color = 0;
  double legend_y = kTop + 14;
  for (const auto& s : spec.series) {
    const char* stroke = kPalette[color++ % 8];
    std::string segment;
    std::size_t seg_points = 0;
    auto flush = [&] {
      if (seg_points >= 2 && s.line)
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
               "\" stroke-width=\"1.8\" points=\"" + segment + "\"/>\n";
      segment.clear();
      seg_points = 0;
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!plottable(s.x[i], spec.log_x) || !plottable(s.y[i], spec.log_y)) {
        flush();
        continue;
      }
      const double x = px(s.x[i]), y = py(s.y[i]);
      segment += fmt("%.2f", x) + "," + fmt("%.2f", y) + " ";
      ++seg_points;
      if (s.markers)
        svg += "<circle cx=\"" + fmt("%.2f", x) + "\" cy=\"" + fmt("%.2f", y) +
               "\" r=\"2.8\" fill=\"" + std::string(stroke) + "\"/>\n";
    }
    flush();
    if (!s.label.empty()) {
      const double lx = kLeft + pw - 170;
      svg += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", legend_y - 4) +
             "\" x2=\"" + fmt("%.2f", lx + 22) + "\" y2=\"" + fmt("%.2f", legend_y - 4) +
             "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + fmt("%.2f", lx + 28) + "\" y=\"" + fmt("%.2f", legend_y) +
             "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(s.label) + "</text>\n";
      legend_y += 16;
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_plot_svg(const std::string& path, const PlotSpec& spec) {
  write_text(path, render_plot_svg(spec));
}

}  // namespace lplab
