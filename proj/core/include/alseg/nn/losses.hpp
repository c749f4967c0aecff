#pragma once

#include <cstdint>
#include <vector>

#include "alseg/tensor.hpp"

namespace alseg::nn {

// Numerically stable per-pixel softmax over the channel axis of (N,C,H,W).
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits);

struct CeOut {
  double mean = 0.0;                // over batch and pixels
  std::vector<double> per_image;    // mean over pixels of each image
};

// Cross-entropy of softmax(logits) against integer targets (N,H,W).
// When dlogits is non-null it receives d(mean CE)/dlogits, i.e. the
// gradient of the batch-and-pixel mean.
template <typename T>
CeOut softmax_ce(const Tensor<T>& logits, const Tensor<std::uint8_t>& targets,
                 Tensor<T>* dlogits);

}  // namespace alseg::nn
