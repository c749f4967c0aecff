#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "alseg/data/types.hpp"
#include "alseg/nn/loss_predictor.hpp"
#include "alseg/nn/unet.hpp"
#include "alseg/train/config.hpp"

namespace alseg::train {

struct TrainedModel {
  nn::UNet<float> model;
  std::optional<nn::LossPredictor<float>> loss_predictor;
  TrainHistory history;
};

// From-scratch supervised training under the fixed-step protocol: weights
// are freshly initialized from cfg.seed, every batch draws batch_size
// labelled samples uniformly with replacement, and exactly
// epochs * iters_per_epoch Adam steps run no matter how small the labelled
// set is. The returned weights are the final-epoch weights.
//
// With with_loss_module set, the loss-prediction head trains jointly
// (total loss = CE + loss_weight * ranking term) and gradients stop flowing
// into the feature taps once the warm phase ends (when
// lp_cfg.detach_features is set).
TrainedModel train(const nn::SegModelConfig& model_cfg,
                   const std::vector<const data::SliceSample*>& labelled,
                   const TrainConfig& cfg, bool with_loss_module = false,
                   const nn::LossPredictorConfig& lp_cfg = {});

// Fraction of the epochs treated as the warm phase for the loss module.
inline constexpr double kLossModuleWarmFraction = 40.0 / 75.0;

}  // namespace alseg::train
