#pragma once

#include <string>
#include <vector>

namespace rdp {

struct Bar {
  std::string label;
  double value = 0.0;
  /// Whisker ends; equal to `value` when no interval is drawn.
  double low = 0.0;
  double high = 0.0;
};

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string bar_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars);

/// Non-positive points are dropped since they have no place on log axes.
std::string loglog_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                             const std::vector<LineSeries>& series);

}  // namespace rdp
