#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "alseg/data/synthetic.hpp"
#include "alseg/data/types.hpp"

namespace alseg::data {

// On-disk layout, one directory per volume:
//   <root>/<split>/<volume_id>/image.bin   float32 LE, D*H*W
//   <root>/<split>/<volume_id>/label.bin   uint8, D*H*W
//   <root>/<split>/<volume_id>/meta.json   shape, spacing, class_count
// <split> is one of train/validation/test.

void write_volume(const std::filesystem::path& volume_dir,
                  const VolumeRecord& volume, int class_count);

VolumeRecord read_volume(const std::filesystem::path& volume_dir,
                         int* class_count_out);

// Writes a full dataset root; `splits[i]` assigns volumes[i].
void write_dataset_root(const std::filesystem::path& root,
                        const std::vector<VolumeRecord>& volumes,
                        const std::vector<Split>& splits, int class_count);

// Reads every volume under <root>/{train,validation,test}, applies
// percentile normalization and slicing, and returns the slice dataset.
// Volumes are visited in lexicographic id order.
DatasetSplit load_dataset_root(const std::filesystem::path& root,
                               double target_spacing,
                               std::array<std::size_t, 2> target_size);

}  // namespace alseg::data
