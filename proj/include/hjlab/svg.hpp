#pragma once

#include <string>
#include <vector>

#include "hjlab/model.hpp"

namespace hjlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 480;
};

/// Hand-written SVG line plot: axes, tick labels, one polyline and one
/// legend entry per series. Plain text output, no renderer involved.
void write_line_plot(const std::string& path,
                     const std::vector<PlotSeries>& series,
                     const PlotOptions& opt);

/// Grayscale-to-color cell heatmap with optional polyline overlays
/// (level lines). NaN cells are left transparent.
void write_heatmap(const std::string& path, int nx, int ny,
                   const std::vector<double>& values, Model::BBox bbox,
                   const std::vector<std::vector<Vec2>>& overlays,
                   const std::string& title);

}  // namespace hjlab
