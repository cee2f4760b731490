#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pimdc {

// Hand-rolled SVG line chart: axes, ticks, one polyline per series, legend.
// Charts are derived views; they never feed back into CSV content.
struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  bool log_x = false;  // position x on a log10 scale (array-size sweeps)

  std::string render() const;
};

}  // namespace pimdc
