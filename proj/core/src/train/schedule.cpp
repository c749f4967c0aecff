#include "alseg/train/schedule.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "alseg/rng.hpp"

namespace alseg::train {

void TrainConfig::validate() const {
  if (epochs < 1 || iters_per_epoch < 1 || batch_size < 1)
    throw std::invalid_argument("train: epochs/iters/batch must be positive");
  if (!(lr_init > 0.0)) throw std::invalid_argument("train: lr_init > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay >= 0");
  if (warmup_epochs < 0 || warmup_epochs > epochs)
    throw std::invalid_argument("train: warmup_epochs in [0, epochs]");
  if (!(warmup_factor >= 1.0))
    throw std::invalid_argument("train: warmup_factor >= 1");
  if (aug_rotation_deg[0] > aug_rotation_deg[1])
    throw std::invalid_argument("train: rotation interval reversed");
  if (aug_noise_sigma < 0.0) throw std::invalid_argument("train: noise sigma >= 0");
}

std::string TrainConfig::digest() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "train|e=%d|i=%d|b=%d|lr=%.17g|wd=%.17g|we=%d|wf=%.17g|"
                "rot=%.17g,%.17g|sig=%.17g|seed=%" PRIu64,
                epochs, iters_per_epoch, batch_size, lr_init, weight_decay,
                warmup_epochs, warmup_factor, aug_rotation_deg[0],
                aug_rotation_deg[1], aug_noise_sigma, seed);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a64(buf));
  return hex;
}

std::string TrainHistory::digest() const {
  std::uint64_t h = fnv1a64(epoch_ce.data(), epoch_ce.size() * sizeof(double));
  h = fnv1a64(lr_trace.data(), lr_trace.size() * sizeof(double), h);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

double lr_at(int step, const TrainConfig& cfg) {
  const int total = cfg.total_steps();
  if (step < 0 || step >= total)
    throw std::invalid_argument("lr_at: step out of range");

  const int warmup = cfg.warmup_epochs * cfg.iters_per_epoch;
  const double peak = cfg.warmup_factor * cfg.lr_init;
  if (step < warmup)
    return cfg.lr_init +
           (peak - cfg.lr_init) * (static_cast<double>(step) / warmup);

  const int last = total - 1;
  if (last == warmup) return peak;  // degenerate single-step tail
  const double t = static_cast<double>(step - warmup) /
                   static_cast<double>(last - warmup);
  return peak * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace alseg::train
