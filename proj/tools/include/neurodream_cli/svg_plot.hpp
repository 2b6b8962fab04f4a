#pragma once

#include <string>
#include <vector>

#include "neurodream/trainer.hpp"

namespace neurodream::cli {

// One labelled group of runs, already reduced to per-game statistics.
struct PlotSeries {
  std::string label;
  int first_game = 1;  // game index of element 0
  AggregateSeries stats;
};

struct PlotStyle {
  std::string title;
  std::string x_label = "games";
  std::string y_label;
  int width = 720;
  int height = 420;
};

// Mean dashed, 80th percentile solid, mean +- std shaded; one color per series.
std::string render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style);

}  // namespace neurodream::cli
