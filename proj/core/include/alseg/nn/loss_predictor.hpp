#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/nn/layers.hpp"
#include "alseg/tensor.hpp"

namespace alseg::nn {

struct LossPredictorConfig {
  int tap_projection_dim = 32;
  double margin = 1.0;
  double loss_weight = 1.0;      // weight of the ranking term in the total loss
  bool detach_features = true;   // stop gradients into the taps after the warm phase

  void validate() const;
};

// Predicts the per-image task loss from hidden feature maps: every tap is
// global-average-pooled, linearly projected and rectified; the concatenated
// projections feed a final linear unit.
template <typename T>
class LossPredictor {
 public:
  LossPredictor(const LossPredictorConfig& cfg,
                std::vector<std::size_t> tap_channels);

  struct Workspace {
    std::vector<Tensor<T>> gap;        // (N, C_t)
    std::vector<typename Linear<T>::Cache> proj_cache;
    std::vector<Tensor<T>> proj_out;   // pre-activation
    std::vector<Tensor<T>> act;        // rectified projections
    Tensor<T> concat;
    typename Linear<T>::Cache head_cache;
    Tensor<T> head_out;                // (N, 1)
    // backward scratch
    Tensor<T> dhead, dconcat, dact, dproj, dgap;
    std::vector<std::vector<std::size_t>> tap_shapes;
  };

  // taps are the segmentation network's feature maps, deepest first.
  void forward(const std::vector<const Tensor<T>*>& taps, Workspace& ws,
               Tensor<T>& pred) const;

  // Accumulates parameter gradients from dpred (N); when tap_grads is
  // non-null it receives one gradient tensor per tap.
  void backward(const Tensor<T>& dpred, Workspace& ws,
                std::vector<Tensor<T>>* tap_grads);

  void init_weights(std::uint64_t seed);
  std::vector<Param<T>*> params();
  std::size_t parameter_count() const;
  void zero_grad();

  const LossPredictorConfig& config() const { return cfg_; }
  const std::vector<std::size_t>& tap_channels() const { return tap_channels_; }

  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

 private:
  LossPredictorConfig cfg_;
  std::vector<std::size_t> tap_channels_;
  std::vector<Linear<T>> proj_;
  Linear<T> head_;
  bool trained_ = false;
};

// Pairwise hinge ranking loss over disjoint batch pairs (0,1), (2,3), ...;
// an odd trailing element is dropped. For a pair (i, j):
//   max(0, -sign(l_i - l_j) * (p_i - p_j) + margin),
// averaged over pairs. dpred, when requested, receives the gradient.
template <typename T>
T ranking_loss(const std::vector<T>& pred, const std::vector<T>& truth,
               T margin, std::vector<T>* dpred);

}  // namespace alseg::nn
