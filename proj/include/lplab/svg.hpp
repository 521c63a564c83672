#pragma once

#include <string>
#include <vector>

namespace lplab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;     // connect consecutive plottable points
  bool markers = true;  // circle at every plottable point
};

// Self-contained SVG line/scatter plot. Log axes drop non-positive samples;
// non-finite samples break the polyline. Rendering is deterministic, so plot
// files byte-reproduce under reruns of a deterministic pipeline.
struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

std::string render_plot_svg(const PlotSpec& spec);
void write_plot_svg(const std::string& path, const PlotSpec& spec);

}  // namespace lplab
