#pragma once

#include <string>

#include "gibbslab/sweep.hpp"

namespace gibbslab {

struct PlotOptions {
  std::string title;
  std::string x_label = "sweep";
  std::string y_label = "value";
  bool log_x = false;  // log10 axis; a zero abscissa is shifted by the
                       // smallest positive value so it stays plottable
};

// Minimal static line chart: one polyline per quantity, +-1 std-err whiskers
// where present, axes, ticks, legend. A pure function of the sweep rows.
std::string render_svg(const SweepResult& result, const PlotOptions& opts);
void write_svg_file(const std::string& path, const SweepResult& result,
                    const PlotOptions& opts);

}  // namespace gibbslab
