#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alseg/tensor.hpp"

namespace alseg::data {

using ClassId = std::uint8_t;

// A 3D scan plus per-voxel class labels. Axis 0 is the slicing axis;
// spacing is (mm per step) along (axis0, y, x).
struct VolumeRecord {
  std::string volume_id;
  Grid3D<float> intensities;
  Grid3D<ClassId> labels;
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  // Throws std::invalid_argument if shapes differ, spacing is non-positive,
  // or labels fall outside [0, class_count).
  void validate(int class_count) const;
};

// One 2D image/mask pair, the unit of annotation.
struct SliceSample {
  std::string volume_id;
  int slice_index = 0;
  Grid2D<float> image;       // normalized to [0, 1]
  Grid2D<ClassId> mask;
  std::array<double, 2> pixel_spacing{1.0, 1.0};  // (mm/px along y, x)

  std::string id() const { return volume_id + ":" + std::to_string(slice_index); }
};

inline std::string sample_id(const std::string& volume_id, int slice_index) {
  return volume_id + ":" + std::to_string(slice_index);
}

// Volume-disjoint train/validation/test slice sets.
struct DatasetSplit {
  std::vector<SliceSample> train;
  std::vector<SliceSample> validation;
  std::vector<SliceSample> test;
  int class_count = 2;
  // Through-plane spacing per volume (mm between consecutive slices),
  // needed when stacking slices back into volumes for 3D metrics.
  std::map<std::string, double> slice_spacing;

  void validate() const;  // volume-level disjointness, unique ids
};

// Disjoint labelled/unlabelled partition over the train ids.
struct PoolState {
  std::vector<std::string> labelled;    // sorted
  std::vector<std::string> unlabelled;  // sorted
  int cycle = 0;

  void check_invariants(std::size_t train_size) const;
};

}  // namespace alseg::data
