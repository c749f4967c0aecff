#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/rng.hpp"
#include "alseg/tensor.hpp"

namespace alseg::nn {

// A learnable tensor with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void init(std::string n, std::vector<std::size_t> shape) {
    name = std::move(n);
    value.resize(shape);
    grad.resize(std::move(shape));
  }
  void zero_grad() { grad.fill(T(0)); }
};

// Grows a tensor to `shape` if needed without zero-filling on reuse.
template <typename T>
inline void ensure_shape(Tensor<T>& t, const std::vector<std::size_t>& shape) {
  if (t.shape() != shape) t.resize(shape);
}

// 2D convolution, stride 1, odd kernel (1 or 3), zero padding k/2.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, std::size_t in_ch, std::size_t out_ch,
         std::size_t ksize);

  struct Cache {
    Tensor<T> cols;  // im2col buffer (N, K, HW); aliases input when k == 1
    std::vector<std::size_t> in_shape;
  };

  void forward(const Tensor<T>& x, Tensor<T>& y, Cache* cache) const;
  // dx may be null for the first layer.
  void backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>* dx);

  void init_he(Rng& rng);
  std::vector<Param<T>*> params() { return {&weight_, &bias_}; }
  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }

 private:
  std::size_t in_ch_ = 0, out_ch_ = 0, k_ = 0;
  Param<T> weight_;  // (out_ch, in_ch * k * k)
  Param<T> bias_;    // (out_ch)
};

// Transposed convolution with kernel 2, stride 2 (exact 2x upsampling,
// non-overlapping windows).
template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(const std::string& name, std::size_t in_ch, std::size_t out_ch);

  struct Cache {
    Tensor<T> x;  // input copy for the weight gradient
  };

  void forward(const Tensor<T>& x, Tensor<T>& y, Cache* cache) const;
  void backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>* dx);

  void init_he(Rng& rng);
  std::vector<Param<T>*> params() { return {&weight_, &bias_}; }

 private:
  std::size_t in_ch_ = 0, out_ch_ = 0;
  Param<T> weight_;  // (in_ch, out_ch * 4)
  Param<T> bias_;    // (out_ch)
};

// Batch normalization over (N, H, W) per channel, eps 1e-5, running-stat
// momentum 0.1 (unbiased variance in the running estimate).
template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, std::size_t channels);

  struct Cache {
    Tensor<T> xhat;
    std::vector<T> inv_std;
  };

  // Batch statistics; updates the running estimates.
  void forward_train(const Tensor<T>& x, Tensor<T>& y, Cache& cache);
  // Running statistics; no cache, usable concurrently.
  void forward_eval(const Tensor<T>& x, Tensor<T>& y) const;
  void backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>& dx);

  std::vector<Param<T>*> params() { return {&gamma_, &beta_}; }
  std::vector<T>& running_mean() { return running_mean_; }
  std::vector<T>& running_var() { return running_var_; }
  const std::vector<T>& running_mean() const { return running_mean_; }
  const std::vector<T>& running_var() const { return running_var_; }

 private:
  std::size_t channels_ = 0;
  Param<T> gamma_, beta_;
  std::vector<T> running_mean_, running_var_;
};

// y = x for x > 0 else slope * x. Backward recovers the branch from y.
template <typename T>
void leaky_relu_forward(const Tensor<T>& x, Tensor<T>& y, T slope);
template <typename T>
void leaky_relu_backward(const Tensor<T>& dy, const Tensor<T>& y, Tensor<T>& dx,
                         T slope);

// 2x2 max pooling, stride 2.
template <typename T>
struct MaxPoolCache {
  std::vector<std::uint32_t> argmax;  // flat input index per output element
  std::vector<std::size_t> in_shape;
};
template <typename T>
void maxpool2_forward(const Tensor<T>& x, Tensor<T>& y, MaxPoolCache<T>* cache);
template <typename T>
void maxpool2_backward(const Tensor<T>& dy, const MaxPoolCache<T>& cache,
                       Tensor<T>& dx);

// Inverted dropout; mask entries are 0 or 1/(1-rate).
template <typename T>
void dropout_forward(const Tensor<T>& x, Tensor<T>& y, T rate, Rng& rng,
                     Tensor<T>* mask);
template <typename T>
void dropout_backward(const Tensor<T>& dy, const Tensor<T>& mask, Tensor<T>& dx);

// Channel concatenation [a; b] -> y and its adjoint.
template <typename T>
void concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& y);
template <typename T>
void split_channels(const Tensor<T>& dy, Tensor<T>& da, Tensor<T>& db);

// Fully connected layer, weight (out, in).
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim);

  struct Cache {
    Tensor<T> x;
  };

  void forward(const Tensor<T>& x, Tensor<T>& y, Cache* cache) const;
  void backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>* dx);

  void init_he(Rng& rng);
  std::vector<Param<T>*> params() { return {&weight_, &bias_}; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Param<T> weight_, bias_;
};

// Global average pooling (N, C, H, W) -> (N, C).
template <typename T>
void gap_forward(const Tensor<T>& x, Tensor<T>& y);
template <typename T>
void gap_backward(const Tensor<T>& dy, const std::vector<std::size_t>& in_shape,
                  Tensor<T>& dx);

}  // namespace alseg::nn
