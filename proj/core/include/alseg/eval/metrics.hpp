#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "alseg/data/types.hpp"

namespace alseg::eval {

using data::ClassId;

// Dice similarity coefficient for one class, in percent. Both masks empty
// for that class scores 100 (perfect agreement convention).
double dsc(const Grid2D<ClassId>& pred, const Grid2D<ClassId>& target,
           int class_id);
double dsc(const Grid3D<ClassId>& pred, const Grid3D<ClassId>& target,
           int class_id);

// 95th-percentile symmetric boundary distance in mm. Boundary pixels are
// set pixels with at least one non-set 4-neighbour (6 in 3D; outside the
// image counts as non-set). Distances run from each boundary pixel of one
// mask to the nearest set pixel of the other; the percentile uses linear
// interpolation on the sorted distances. Returns nullopt when either class
// region is empty.
std::optional<double> hd95(const Grid2D<ClassId>& pred,
                           const Grid2D<ClassId>& target, int class_id,
                           std::array<double, 2> spacing);
std::optional<double> hd95(const Grid3D<ClassId>& pred,
                           const Grid3D<ClassId>& target, int class_id,
                           std::array<double, 3> spacing);

// Exact squared Euclidean distance transform to the nearest set voxel,
// anisotropic spacing supported. Unset grids return +inf everywhere.
std::vector<double> squared_edt_2d(const std::vector<char>& set, std::size_t h,
                                   std::size_t w, std::array<double, 2> spacing);
std::vector<double> squared_edt_3d(const std::vector<char>& set, std::size_t d,
                                   std::size_t h, std::size_t w,
                                   std::array<double, 3> spacing);

struct MetricRecord {
  enum class Scope { slices_2d, volumes_3d };
  enum class Kind { dsc, hd95 };
  Scope scope;
  Kind kind;
  // Mean of defined values per non-background class.
  std::map<int, double> per_class;
  // Number of slice/volume evaluations excluded as undefined, per class.
  std::map<int, int> undefined_count;
  // Mean over non-background classes with at least one defined value;
  // NaN when nothing was defined.
  double mean_non_background = 0.0;
};

struct EvalSummary {
  MetricRecord dsc_2d, hd95_2d, dsc_3d, hd95_3d;
};

using SlicePredictor =
    std::function<Grid2D<ClassId>(const data::SliceSample&)>;

// 2D metrics per test slice then averaged; 3D metrics on per-volume stacks
// then averaged over volumes. Slices of a volume are stacked in ascending
// slice_index order with through-plane spacing from the dataset.
EvalSummary evaluate_model(const SlicePredictor& predict,
                           const data::DatasetSplit& dataset);

}  // namespace alseg::eval
