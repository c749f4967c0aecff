#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "alseg/nn/loss_predictor.hpp"
#include "alseg/nn/unet.hpp"

namespace alseg::nn {

// Content hash over the model configuration, parameters and batch-norm
// running statistics. Identifies the exact weights a score table was
// produced with.
std::string model_digest(UNet<float>& model);

// Binary checkpoint: config digest + all parameters + running statistics
// (+ the loss predictor when present). Bit-exact round trip.
void save_checkpoint(const std::filesystem::path& path, UNet<float>& model,
                     const LossPredictor<float>* loss_predictor = nullptr);

struct LoadedCheckpoint {
  UNet<float> model;
  std::optional<LossPredictor<float>> loss_predictor;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace alseg::nn
