#pragma once

#include <string>
#include <vector>

#include "glmos/model.hpp"

namespace glmos {

// Transformation plot of one fitted variable: the quantification against the
// original value (category value, rank position, or raw numeric scale).
struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double count = 0.0;
};

struct PlotData {
  std::vector<PlotPoint> curve;   // staircase (steps), sampled curve
                                  // (splines) or line (numeric)
  std::vector<PlotPoint> points;  // one marker per category
};

PlotData transformation_plot_data(const FittedVariable& var, int samples = 100);

// Self-contained SVG 1.1 document. `timestamp` adds a generation-time
// comment; suppress it when outputs must be reproducible byte for byte.
std::string transformation_svg(const FittedVariable& var, bool timestamp = true);

void write_transformation_svg(const FittedVariable& var, const std::string& path,
                              bool timestamp = true);

}  // namespace glmos
