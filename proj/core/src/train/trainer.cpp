#include "alseg/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "alseg/nn/losses.hpp"
#include "alseg/train/adam.hpp"
#include "alseg/train/augment.hpp"
#include "alseg/train/schedule.hpp"

namespace alseg::train {

TrainedModel train(const nn::SegModelConfig& model_cfg,
                   const std::vector<const data::SliceSample*>& labelled,
                   const TrainConfig& cfg, bool with_loss_module,
                   const nn::LossPredictorConfig& lp_cfg) {
  model_cfg.validate();
  cfg.validate();
  if (labelled.empty()) throw std::invalid_argument("train: empty labelled set");
  const std::size_t h = labelled.front()->image.h;
  const std::size_t w = labelled.front()->image.w;
  for (const auto* s : labelled)
    if (s->image.h != h || s->image.w != w)
      throw std::invalid_argument("train: inconsistent slice sizes");
  if (static_cast<int>(labelled.front()->image.h) <= 0)
    throw std::invalid_argument("train: empty slices");

  const auto t0 = std::chrono::steady_clock::now();

  TrainedModel out{nn::UNet<float>(model_cfg), std::nullopt, {}};
  out.model.init_weights(derive_seed(cfg.seed, "weights"));

  std::vector<nn::Param<float>*> params = out.model.params();
  if (with_loss_module) {
    lp_cfg.validate();
    out.loss_predictor.emplace(lp_cfg, out.model.tap_channels());
    out.loss_predictor->init_weights(derive_seed(cfg.seed, "losspred"));
    for (auto* p : out.loss_predictor->params()) params.push_back(p);
  }
  Adam<float> opt(params, cfg.weight_decay);

  Rng batch_rng(derive_seed(cfg.seed, "batches"));
  Rng aug_rng(derive_seed(cfg.seed, "augment"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  const std::size_t n = static_cast<std::size_t>(cfg.batch_size);
  Tensor<float> images({n, 1, h, w});
  Tensor<std::uint8_t> targets({n, h, w});
  Tensor<float> dlogits;
  nn::UNet<float>::Workspace ws;
  typename nn::LossPredictor<float>::Workspace lp_ws;
  Tensor<float> lp_pred;
  std::vector<Tensor<float>> tap_grads;

  const int detach_from_epoch = with_loss_module && lp_cfg.detach_features
                                    ? static_cast<int>(std::floor(
                                          kLossModuleWarmFraction * cfg.epochs))
                                    : cfg.epochs;

  out.history.epoch_ce.reserve(cfg.epochs);
  out.history.lr_trace.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_ce = 0.0;
    out.history.lr_trace.push_back(lr_at(epoch * cfg.iters_per_epoch, cfg));
    const bool detached = with_loss_module && epoch >= detach_from_epoch;

    for (int it = 0; it < cfg.iters_per_epoch; ++it) {
      const int step = epoch * cfg.iters_per_epoch + it;
      const double lr = lr_at(step, cfg);

      // Uniform with replacement; samples recur freely across batches.
      for (std::size_t b = 0; b < n; ++b) {
        const auto* s = labelled[batch_rng.uniform_index(labelled.size())];
        const data::SliceSample a = augment(*s, cfg, aug_rng);
        std::copy(a.image.v.begin(), a.image.v.end(),
                  images.data() + b * h * w);
        std::copy(a.mask.v.begin(), a.mask.v.end(),
                  targets.data() + b * h * w);
      }

      out.model.zero_grad();
      if (out.loss_predictor) out.loss_predictor->zero_grad();

      out.model.train_forward(images, dropout_rng, ws);
      const nn::CeOut ce = nn::softmax_ce(ws.logits, targets, &dlogits);
      if (!std::isfinite(ce.mean) || ce.mean < 0.0)
        throw std::runtime_error("train: CE loss not finite at step " +
                                 std::to_string(step));
      epoch_ce += ce.mean;

      if (out.loss_predictor) {
        out.loss_predictor->forward(out.model.taps(ws), lp_ws, lp_pred);
        std::vector<float> pred(lp_pred.data(), lp_pred.data() + lp_pred.size());
        std::vector<float> truth(ce.per_image.begin(), ce.per_image.end());
        std::vector<float> dpred;
        nn::ranking_loss<float>(pred, truth,
                                static_cast<float>(lp_cfg.margin), &dpred);
        const float lambda = static_cast<float>(lp_cfg.loss_weight);
        Tensor<float> dpred_t({pred.size()});
        for (std::size_t i = 0; i < pred.size(); ++i)
          dpred_t[i] = lambda * dpred[i];
        out.loss_predictor->backward(dpred_t, lp_ws,
                                     detached ? nullptr : &tap_grads);
        out.model.train_backward(dlogits, detached ? nullptr : &tap_grads, ws);
      } else {
        out.model.train_backward(dlogits, nullptr, ws);
      }
      opt.step(lr);
    }
    out.history.epoch_ce.push_back(epoch_ce / cfg.iters_per_epoch);
  }

  if (out.loss_predictor) out.loss_predictor->mark_trained();
  out.history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace alseg::train
