#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "alseg/nn/layers.hpp"
#include "alseg/rng.hpp"
#include "alseg/tensor.hpp"

namespace alseg::nn {

struct SegModelConfig {
  int depth = 4;             // resolution levels including the bottleneck
  int base_channels = 16;    // channels at full resolution, doubled per level
  int class_count = 2;
  double dropout_rate = 0.5;
  double negative_slope = 0.01;

  void validate() const;
  std::string digest() const;  // canonical content hash, hex
};

// One UNet stage: (conv3x3 - BN - leaky ReLU) x 2.
template <typename T>
struct ConvBlock {
  Conv2d<T> conv_a, conv_b;
  BatchNorm2d<T> bn_a, bn_b;
  T slope = T(0.01);

  struct Cache {
    typename Conv2d<T>::Cache ca, cb;
    typename BatchNorm2d<T>::Cache bn_ca, bn_cb;
    Tensor<T> za, ya, act_a, zb, yb;  // conv/bn/activation intermediates
    Tensor<T> g1, g2;                 // backward scratch
  };

  ConvBlock() = default;
  ConvBlock(const std::string& name, std::size_t in_ch, std::size_t out_ch,
            T slope_);
  void forward_train(const Tensor<T>& x, Tensor<T>& out, Cache& c);
  void forward_eval(const Tensor<T>& x, Tensor<T>& out, Cache& scratch) const;
  void backward(const Tensor<T>& dout, Cache& c, Tensor<T>* dx);
  void collect(std::vector<Param<T>*>& out);
  void init(Rng& rng);
};

// Per-image forward outputs.
template <typename T>
struct ForwardResult {
  Tensor<T> logits;         // (N, C, H, W)
  Tensor<T> probabilities;  // (N, C, H, W)
  // Hidden feature maps, deepest first: bottleneck block output followed by
  // every decoder block output. Count equals SegModelConfig::depth.
  std::vector<Tensor<T>> feature_taps;
  Tensor<T> bottleneck;     // (N, channels) global-average-pooled latent
};

// 2D UNet: `depth` encoder levels (the deepest is the bottleneck), skip
// connections, 2x2 transposed-conv upsampling, 1x1 classification head.
// Dropout sits after the two deepest encoder blocks and the deepest decoder
// block. Input is a single grey channel; H and W must be divisible by
// 2^(depth-1).
template <typename T>
class UNet {
 public:
  explicit UNet(const SegModelConfig& cfg);

  const SegModelConfig& config() const { return cfg_; }

  void init_weights(std::uint64_t seed);

  // All learnable parameters in a fixed registry order.
  std::vector<Param<T>*> params();
  std::size_t parameter_count() const;
  void zero_grad();

  struct Workspace;

  // Inference-mode forward (batch-norm running statistics). When
  // stochastic_dropout is set, dropout masks are resampled from `rng`;
  // otherwise dropout is the identity and the result is deterministic.
  // Reentrant: distinct workspaces may run concurrently on a const model.
  ForwardResult<T> forward(const Tensor<T>& images, bool stochastic_dropout,
                           Rng* rng) const;
  ForwardResult<T> forward(const Tensor<T>& images, bool stochastic_dropout,
                           Rng* rng, Workspace& ws) const;

  // Training-mode forward: batch statistics, running-stat update, dropout
  // active, caches retained for backward. Logits land in ws.logits.
  void train_forward(const Tensor<T>& images, Rng& rng, Workspace& ws);

  // Backward from dlogits. tap_grads, when non-null, supplies one gradient
  // tensor per feature tap (deepest first) to add at the tap points.
  void train_backward(const Tensor<T>& dlogits,
                      const std::vector<Tensor<T>>* tap_grads, Workspace& ws);

  // Tap views over the last train_forward call, deepest first.
  std::vector<const Tensor<T>*> taps(const Workspace& ws) const;

  // Channel count of each tap, deepest first (bottleneck + decoder stages).
  std::vector<std::size_t> tap_channels() const;

  struct Workspace {
    // Encoder side.
    std::vector<Tensor<T>> pooled;                         // depth-1
    std::vector<MaxPoolCache<T>> pool_cache;               // depth-1
    std::vector<Tensor<T>> enc_out;                        // depth
    std::vector<typename ConvBlock<T>::Cache> enc_cache;   // depth
    std::vector<Tensor<T>> enc_drop;                       // dropout outputs
    std::vector<Tensor<T>> enc_drop_mask;
    // Decoder side.
    std::vector<Tensor<T>> up;                             // depth-1
    std::vector<typename ConvTranspose2d<T>::Cache> up_cache;
    std::vector<Tensor<T>> cat;
    std::vector<Tensor<T>> dec_out;
    std::vector<typename ConvBlock<T>::Cache> dec_cache;
    Tensor<T> dec_drop, dec_drop_mask;
    Tensor<T> logits;
    typename Conv2d<T>::Cache head_cache;
    // Backward scratch.
    Tensor<T> grad_a, grad_b, grad_up;
    std::vector<Tensor<T>> dskip;
  };

  // Serialization hooks (see checkpoint.hpp).
  std::vector<BatchNorm2d<T>*> batch_norms();

 private:
  void build();
  bool enc_has_dropout(int level) const;

  SegModelConfig cfg_;
  std::vector<ConvBlock<T>> enc_;
  std::vector<ConvBlock<T>> dec_;
  std::vector<ConvTranspose2d<T>> up_;
  Conv2d<T> head_;
};

using UNetF = UNet<float>;
using UNetD = UNet<double>;

}  // namespace alseg::nn
