#pragma once

#include <array>
#include <vector>

#include "alseg/data/types.hpp"

namespace alseg::data {

// Percentile with linear interpolation between order statistics:
// rank = p/100 * (n-1), value = lerp(x[floor(rank)], x[ceil(rank)]).
double percentile_linear(std::vector<double> values, double p);

// Per-scan 1%/99% percentile normalization: intensities are clipped to
// [p1, p99] and affinely mapped to [0, 1]. A degenerate scan (p1 == p99)
// maps to all zeros. Labels and spacing are untouched. Idempotent on
// already-normalized data.
VolumeRecord normalize_intensity(const VolumeRecord& volume);

// Resamples the volume to isotropic `target_spacing` (trilinear intensities,
// nearest-neighbour labels), slices along axis 0, and resizes every slice to
// `target_size` = (H, W). Output count along an axis with n samples and
// spacing s is floor((n-1)*s / target) + 1. Slice order is preserved;
// pixel_spacing on the slices reflects the resize.
std::vector<SliceSample> volume_to_slices(const VolumeRecord& volume,
                                          double target_spacing,
                                          std::array<std::size_t, 2> target_size);

}  // namespace alseg::data
