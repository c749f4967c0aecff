#pragma once

#include "alseg/data/types.hpp"
#include "alseg/rng.hpp"
#include "alseg/train/config.hpp"

namespace alseg::train {

// Rotation by d ~ U(rotation interval) followed by i.i.d. Gaussian pixel
// noise. The image rotates bilinearly with zero-filled borders, the mask
// with nearest-neighbour sampling and background fill. Draw order: angle,
// then noise row-major.
data::SliceSample augment(const data::SliceSample& sample,
                          std::array<double, 2> rotation_deg,
                          double noise_sigma, Rng& rng);

inline data::SliceSample augment(const data::SliceSample& sample,
                                 const TrainConfig& cfg, Rng& rng) {
  return augment(sample, cfg.aug_rotation_deg, cfg.aug_noise_sigma, rng);
}

}  // namespace alseg::train
