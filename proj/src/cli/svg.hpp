#pragma once
#include <string>
#include <utility>
#include <vector>

namespace dynip::cli {

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Single polyline with axes and min/max tick labels. Points that cannot be
/// drawn on a log axis are dropped.
std::string line_plot(const PlotSpec& spec, const std::vector<std::pair<double, double>>& points);

}  // namespace dynip::cli
