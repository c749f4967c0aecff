#include "alseg/nn/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "alseg/nn/layers.hpp"

namespace alseg::nn {

template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits) {
  const std::size_t n = logits.dim(0), c = logits.dim(1),
                    hw = logits.dim(2) * logits.dim(3);
  Tensor<T> probs(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* in = logits.data() + i * c * hw;
    T* out = probs.data() + i * c * hw;
    for (std::size_t p = 0; p < hw; ++p) {
      T mx = in[p];
      for (std::size_t ci = 1; ci < c; ++ci) mx = std::max(mx, in[ci * hw + p]);
      double sum = 0.0;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double e = std::exp(static_cast<double>(in[ci * hw + p] - mx));
        out[ci * hw + p] = static_cast<T>(e);
        sum += e;
      }
      const double inv = 1.0 / sum;
      for (std::size_t ci = 0; ci < c; ++ci)
        out[ci * hw + p] = static_cast<T>(static_cast<double>(out[ci * hw + p]) * inv);
    }
  }
  return probs;
}

template <typename T>
CeOut softmax_ce(const Tensor<T>& logits, const Tensor<std::uint8_t>& targets,
                 Tensor<T>* dlogits) {
  const std::size_t n = logits.dim(0), c = logits.dim(1), h = logits.dim(2),
                    w = logits.dim(3), hw = h * w;
  if (targets.ndim() != 3 || targets.dim(0) != n || targets.dim(1) != h ||
      targets.dim(2) != w)
    throw std::invalid_argument("softmax_ce: target shape mismatch");

  CeOut out;
  out.per_image.resize(n);
  if (dlogits) ensure_shape(*dlogits, logits.shape());

  const double inv_total = 1.0 / static_cast<double>(n * hw);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* in = logits.data() + i * c * hw;
    const std::uint8_t* tgt = targets.data() + i * hw;
    T* dl = dlogits ? dlogits->data() + i * c * hw : nullptr;
    double img_loss = 0.0;
    for (std::size_t p = 0; p < hw; ++p) {
      T mx = in[p];
      for (std::size_t ci = 1; ci < c; ++ci) mx = std::max(mx, in[ci * hw + p]);
      double sum = 0.0;
      for (std::size_t ci = 0; ci < c; ++ci)
        sum += std::exp(static_cast<double>(in[ci * hw + p] - mx));
      const std::size_t t = tgt[p];
      if (t >= c) throw std::invalid_argument("softmax_ce: target class out of range");
      const double log_p =
          static_cast<double>(in[t * hw + p] - mx) - std::log(sum);
      img_loss -= log_p;
      if (dl) {
        const double inv_sum = 1.0 / sum;
        for (std::size_t ci = 0; ci < c; ++ci) {
          const double prob =
              std::exp(static_cast<double>(in[ci * hw + p] - mx)) * inv_sum;
          dl[ci * hw + p] =
              static_cast<T>((prob - (ci == t ? 1.0 : 0.0)) * inv_total);
        }
      }
    }
    out.per_image[i] = img_loss / static_cast<double>(hw);
    total += img_loss;
  }
  out.mean = total * inv_total;
  return out;
}

template Tensor<float> softmax_channels<float>(const Tensor<float>&);
template Tensor<double> softmax_channels<double>(const Tensor<double>&);
template CeOut softmax_ce<float>(const Tensor<float>&,
                                 const Tensor<std::uint8_t>&, Tensor<float>*);
template CeOut softmax_ce<double>(const Tensor<double>&,
                                  const Tensor<std::uint8_t>&, Tensor<double>*);

}  // namespace alseg::nn
