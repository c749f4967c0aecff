#pragma once

#include "alseg/train/config.hpp"

namespace alseg::train {

// Warmup-then-cosine learning rate. Steps [0, warmup) ramp linearly from
// lr_init to warmup_factor * lr_init; the remaining steps decay with a half
// cosine that reaches 0 at the final step.
double lr_at(int step, const TrainConfig& cfg);

}  // namespace alseg::train
