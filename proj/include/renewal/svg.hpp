#pragma once

#include <string>
#include <vector>

namespace renewal {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Writes a static line chart. Returns false instead of throwing on any failure,
/// so plotting never aborts a numeric run.
bool write_svg_plot(const std::string& path, const PlotSpec& spec) noexcept;

}  // namespace renewal
