#pragma once

#include <string>
#include <vector>

namespace gdfactor {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool markers = false;
};

/// Standalone 800x600 SVG line chart. Points that are non-finite, or
/// nonpositive on a log axis, are dropped.
std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace gdfactor
