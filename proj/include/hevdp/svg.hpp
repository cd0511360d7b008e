#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hevdp {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart description. `guides` are horizontal reference lines (bounds).
struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<double> guides;
};

/// Standalone SVG document.
std::string render_svg(const Plot& plot);
void write_svg(const Plot& plot, const std::filesystem::path& path);

}  // namespace hevdp
