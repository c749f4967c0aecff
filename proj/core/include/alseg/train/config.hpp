#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace alseg::train {

// Fixed-step training protocol: epochs * iters_per_epoch optimizer steps
// regardless of the labelled-set size.
struct TrainConfig {
  int epochs = 75;
  int iters_per_epoch = 250;
  int batch_size = 4;
  double lr_init = 1e-6;
  double weight_decay = 1e-4;
  int warmup_epochs = 10;
  double warmup_factor = 200.0;
  std::array<double, 2> aug_rotation_deg{-10.0, 10.0};
  double aug_noise_sigma = 0.01;
  std::uint64_t seed = 0;

  int total_steps() const { return epochs * iters_per_epoch; }
  void validate() const;
  std::string digest() const;
};

struct TrainHistory {
  std::vector<double> epoch_ce;  // mean CE per epoch
  std::vector<double> lr_trace;  // lr at the first step of each epoch
  double wall_seconds = 0.0;

  std::string digest() const;  // content hash of the loss/lr traces
};

}  // namespace alseg::train
