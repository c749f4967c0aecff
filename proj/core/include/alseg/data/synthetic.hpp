#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "alseg/data/types.hpp"

namespace alseg::data {

struct SyntheticSpec {
  int n_volumes = 30;
  int slices_per_volume = 12;
  std::array<std::size_t, 2> size{64, 64};
  int class_count = 2;
  double spacing = 1.0;  // isotropic, mm
};

// Deterministic synthetic scans: every volume is a stack of slices with 1-2
// smooth blobs per foreground class whose shape drifts slowly along the
// stack, plus a per-volume intensity bias, contrast level, and pixel noise.
// Slices within one volume are therefore strongly correlated while volumes
// differ, which is what makes redundancy-prone querying observable.
std::vector<VolumeRecord> generate_synthetic_volumes(std::uint64_t seed,
                                                     const SyntheticSpec& spec);

// Split assignment by volume index: roughly 20% test, 10% validation
// (at least one volume each), remainder train.
enum class Split { train, validation, test };
std::vector<Split> assign_splits(int n_volumes);

// Full pipeline: volumes -> percentile normalization -> slicing -> splits.
// Identical seeds yield byte-identical datasets.
DatasetSplit generate_synthetic_dataset(std::uint64_t seed, int n_volumes,
                                        int slices_per_volume,
                                        std::array<std::size_t, 2> size,
                                        int class_count);

DatasetSplit generate_synthetic_dataset(std::uint64_t seed,
                                        const SyntheticSpec& spec);

}  // namespace alseg::data
