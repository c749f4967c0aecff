#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alseg/loop/experiment.hpp"

namespace alseg::report {

// Writes per-strategy mean(std) tables for 3D DSC, 2D DSC and 3D/2D HD95
// plus pairwise p-values, as delimiter-separated text:
//   summary_overall.csv   one row per strategy, pooled over cycles >= 1
//   summary_by_cycle.csv  one row per (strategy, cycle)
//   pvalues.csv           pairwise paired-permutation p-values (3D DSC)
// Output is a deterministic function of the results.
void write_report(const loop::AggregateSummary& summary,
                  const std::filesystem::path& out_dir);

struct PlotSpec {
  std::string metric = "dsc3d";   // dsc3d | dsc2d | hd3d | hd2d
  bool x_labelled_size = true;    // otherwise cycle index on x
  bool include_cycle0 = true;
  int width = 720;
  int height = 480;
};

// Learning curves (mean with a 95% normal-approximation CI band per
// strategy) as an SVG vector image. The band needs >= 2 runs.
void write_learning_curve_svg(const loop::AggregateSummary& summary,
                              const PlotSpec& spec,
                              const std::filesystem::path& out_file);

// Box plots of the pooled per-(seed, cycle) metric values per strategy.
void write_box_plot_svg(const loop::AggregateSummary& summary,
                        const PlotSpec& spec,
                        const std::filesystem::path& out_file);

}  // namespace alseg::report
