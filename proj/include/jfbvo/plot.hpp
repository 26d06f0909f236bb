#pragma once

#include <string>
#include <vector>

namespace jfbvo {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line plot with axes, tick labels and a legend.
/// `equal_aspect` keeps one unit the same length on both axes (top-down
/// trajectory views).
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool equal_aspect = false);

}  // namespace jfbvo
