#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crosc::svg {

struct Line {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

/// Polyline plot with linear axes and a tick label at each end.
void line_plot(std::ostream& out, const std::vector<Line>& lines, const std::string& title,
               const std::string& x_label, const std::string& y_label);

/// Cells on a regular grid, values[i][j] at (x[i], y[j]); NaN cells stay blank.
void heatmap(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<std::vector<double>>& values, const std::string& title, const std::string& x_label,
             const std::string& y_label);

}  // namespace crosc::svg
