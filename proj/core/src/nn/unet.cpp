#include "alseg/nn/unet.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

#include "alseg/nn/losses.hpp"

namespace alseg::nn {

void SegModelConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("model: depth must be >= 1");
  if (base_channels < 1) throw std::invalid_argument("model: base_channels >= 1");
  if (class_count < 2) throw std::invalid_argument("model: class_count >= 2");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("model: dropout_rate in [0, 1)");
  if (negative_slope < 0.0)
    throw std::invalid_argument("model: negative_slope >= 0");
}

std::string SegModelConfig::digest() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "unet|d=%d|b=%d|c=%d|p=%.17g|s=%.17g", depth,
                base_channels, class_count, dropout_rate, negative_slope);
  const std::uint64_t h = fnv1a64(buf);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

// ---------------------------------------------------------------------------
// ConvBlock

template <typename T>
ConvBlock<T>::ConvBlock(const std::string& name, std::size_t in_ch,
                        std::size_t out_ch, T slope_)
    : conv_a(name + ".conv_a", in_ch, out_ch, 3),
      conv_b(name + ".conv_b", out_ch, out_ch, 3),
      bn_a(name + ".bn_a", out_ch),
      bn_b(name + ".bn_b", out_ch),
      slope(slope_) {}

template <typename T>
void ConvBlock<T>::forward_train(const Tensor<T>& x, Tensor<T>& out, Cache& c) {
  conv_a.forward(x, c.za, &c.ca);
  bn_a.forward_train(c.za, c.ya, c.bn_ca);
  leaky_relu_forward(c.ya, c.act_a, slope);
  conv_b.forward(c.act_a, c.zb, &c.cb);
  bn_b.forward_train(c.zb, c.yb, c.bn_cb);
  leaky_relu_forward(c.yb, out, slope);
}

template <typename T>
void ConvBlock<T>::forward_eval(const Tensor<T>& x, Tensor<T>& out,
                                Cache& scratch) const {
  conv_a.forward(x, scratch.za, nullptr);
  bn_a.forward_eval(scratch.za, scratch.ya);
  leaky_relu_forward(scratch.ya, scratch.act_a, slope);
  conv_b.forward(scratch.act_a, scratch.zb, nullptr);
  bn_b.forward_eval(scratch.zb, scratch.yb);
  leaky_relu_forward(scratch.yb, out, slope);
}

template <typename T>
void ConvBlock<T>::backward(const Tensor<T>& dout, Cache& c, Tensor<T>* dx) {
  leaky_relu_backward(dout, c.yb, c.g1, slope);
  bn_b.backward(c.g1, c.bn_cb, c.g2);
  conv_b.backward(c.g2, c.cb, &c.g1);
  leaky_relu_backward(c.g1, c.ya, c.g2, slope);
  bn_a.backward(c.g2, c.bn_ca, c.g1);
  conv_a.backward(c.g1, c.ca, dx);
}

template <typename T>
void ConvBlock<T>::collect(std::vector<Param<T>*>& out) {
  for (auto* p : conv_a.params()) out.push_back(p);
  for (auto* p : bn_a.params()) out.push_back(p);
  for (auto* p : conv_b.params()) out.push_back(p);
  for (auto* p : bn_b.params()) out.push_back(p);
}

template <typename T>
void ConvBlock<T>::init(Rng& rng) {
  conv_a.init_he(rng);
  conv_b.init_he(rng);
}

// ---------------------------------------------------------------------------
// UNet

template <typename T>
UNet<T>::UNet(const SegModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  build();
}

template <typename T>
void UNet<T>::build() {
  const int L = cfg_.depth;
  const T slope = static_cast<T>(cfg_.negative_slope);
  auto ch = [&](int i) {
    return static_cast<std::size_t>(cfg_.base_channels) << i;
  };

  enc_.reserve(L);
  for (int i = 0; i < L; ++i)
    enc_.emplace_back("enc" + std::to_string(i), i == 0 ? 1 : ch(i - 1), ch(i),
                      slope);
  up_.reserve(L - 1);
  dec_.reserve(L - 1);
  for (int i = 0; i < L - 1; ++i) {
    up_.emplace_back("up" + std::to_string(i), ch(i + 1), ch(i));
    dec_.emplace_back("dec" + std::to_string(i), 2 * ch(i), ch(i), slope);
  }
  head_ = Conv2d<T>("head", ch(0), static_cast<std::size_t>(cfg_.class_count), 1);
}

template <typename T>
bool UNet<T>::enc_has_dropout(int level) const {
  return cfg_.dropout_rate > 0.0 && level >= cfg_.depth - 2;
}

template <typename T>
void UNet<T>::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& b : enc_) b.init(rng);
  for (auto& u : up_) u.init_he(rng);
  for (auto& b : dec_) b.init(rng);
  head_.init_he(rng);
  for (auto* bn : batch_norms()) {
    std::fill(bn->running_mean().begin(), bn->running_mean().end(), T(0));
    std::fill(bn->running_var().begin(), bn->running_var().end(), T(1));
  }
}

template <typename T>
std::vector<Param<T>*> UNet<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& b : enc_) b.collect(out);
  for (std::size_t i = 0; i < up_.size(); ++i) {
    for (auto* p : up_[i].params()) out.push_back(p);
    dec_[i].collect(out);
  }
  for (auto* p : head_.params()) out.push_back(p);
  return out;
}

template <typename T>
std::size_t UNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (auto* p : const_cast<UNet<T>*>(this)->params()) n += p->value.size();
  return n;
}

template <typename T>
void UNet<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <typename T>
std::vector<BatchNorm2d<T>*> UNet<T>::batch_norms() {
  std::vector<BatchNorm2d<T>*> out;
  for (auto& b : enc_) {
    out.push_back(&b.bn_a);
    out.push_back(&b.bn_b);
  }
  for (auto& b : dec_) {
    out.push_back(&b.bn_a);
    out.push_back(&b.bn_b);
  }
  return out;
}

template <typename T>
std::vector<std::size_t> UNet<T>::tap_channels() const {
  const int L = cfg_.depth;
  std::vector<std::size_t> out;
  out.push_back(static_cast<std::size_t>(cfg_.base_channels) << (L - 1));
  for (int i = L - 2; i >= 0; --i)
    out.push_back(static_cast<std::size_t>(cfg_.base_channels) << i);
  return out;
}

namespace {

template <typename T>
void check_input(const Tensor<T>& x, int depth) {
  if (x.ndim() != 4 || x.dim(1) != 1)
    throw std::invalid_argument("unet: input must be (N, 1, H, W)");
  if (x.dim(0) < 1) throw std::invalid_argument("unet: empty batch");
  const std::size_t div = std::size_t(1) << (depth - 1);
  if (x.dim(2) % div || x.dim(3) % div || x.dim(2) / div < 1 || x.dim(3) / div < 1)
    throw std::invalid_argument(
        "unet: spatial size must be divisible by 2^(depth-1)");
}

}  // namespace

template <typename T>
void UNet<T>::train_forward(const Tensor<T>& images, Rng& rng, Workspace& ws) {
  check_input(images, cfg_.depth);
  const int L = cfg_.depth;
  const T rate = static_cast<T>(cfg_.dropout_rate);

  ws.pooled.resize(L > 1 ? L - 1 : 0);
  ws.pool_cache.resize(L > 1 ? L - 1 : 0);
  ws.enc_out.resize(L);
  ws.enc_cache.resize(L);
  ws.enc_drop.resize(L);
  ws.enc_drop_mask.resize(L);
  ws.up.resize(L - 1);
  ws.up_cache.resize(L - 1);
  ws.cat.resize(L - 1);
  ws.dec_out.resize(L - 1);
  ws.dec_cache.resize(L - 1);

  const Tensor<T>* cur = &images;
  for (int i = 0; i < L; ++i) {
    if (i > 0) {
      maxpool2_forward(*cur, ws.pooled[i - 1], &ws.pool_cache[i - 1]);
      cur = &ws.pooled[i - 1];
    }
    enc_[i].forward_train(*cur, ws.enc_out[i], ws.enc_cache[i]);
    if (enc_has_dropout(i)) {
      dropout_forward(ws.enc_out[i], ws.enc_drop[i], rate, rng,
                      &ws.enc_drop_mask[i]);
      cur = &ws.enc_drop[i];
    } else {
      cur = &ws.enc_out[i];
    }
  }

  for (int i = L - 2; i >= 0; --i) {
    up_[i].forward(*cur, ws.up[i], &ws.up_cache[i]);
    const Tensor<T>& skip =
        enc_has_dropout(i) ? ws.enc_drop[i] : ws.enc_out[i];
    concat_channels(skip, ws.up[i], ws.cat[i]);
    dec_[i].forward_train(ws.cat[i], ws.dec_out[i], ws.dec_cache[i]);
    if (i == L - 2 && rate > T(0)) {
      dropout_forward(ws.dec_out[i], ws.dec_drop, rate, rng, &ws.dec_drop_mask);
      cur = &ws.dec_drop;
    } else {
      cur = &ws.dec_out[i];
    }
  }

  head_.forward(*cur, ws.logits, &ws.head_cache);
}

template <typename T>
void UNet<T>::train_backward(const Tensor<T>& dlogits,
                             const std::vector<Tensor<T>>* tap_grads,
                             Workspace& ws) {
  const int L = cfg_.depth;
  const T rate = static_cast<T>(cfg_.dropout_rate);
  if (tap_grads && tap_grads->size() != static_cast<std::size_t>(L))
    throw std::invalid_argument("unet: tap gradient count mismatch");

  Tensor<T>& ga = ws.grad_a;
  Tensor<T>& gb = ws.grad_b;
  Tensor<T>& gup = ws.grad_up;
  ws.dskip.resize(L - 1);

  auto add_tap_grad = [&](int tap_index) {
    if (!tap_grads) return;
    const Tensor<T>& tg = (*tap_grads)[tap_index];
    if (tg.empty()) return;
    if (!tg.same_shape(ga))
      throw std::invalid_argument("unet: tap gradient shape mismatch");
    for (std::size_t q = 0; q < ga.size(); ++q) ga[q] += tg[q];
  };

  head_.backward(dlogits, ws.head_cache, &ga);

  // Decoder, shallowest stage first (reverse of the forward chain).
  for (int i = 0; i <= L - 2; ++i) {
    if (i == L - 2 && rate > T(0)) {
      dropout_backward(ga, ws.dec_drop_mask, gb);
      std::swap(ga, gb);
    }
    add_tap_grad(L - 1 - i);
    dec_[i].backward(ga, ws.dec_cache[i], &gb);
    const std::size_t skip_ch = ws.cat[i].dim(1) - ws.up[i].dim(1);
    ensure_shape(ws.dskip[i], {gb.dim(0), skip_ch, gb.dim(2), gb.dim(3)});
    ensure_shape(gup, ws.up[i].shape());
    split_channels(gb, ws.dskip[i], gup);
    up_[i].backward(gup, ws.up_cache[i], &ga);
  }

  // ga holds the gradient at the bottleneck post-dropout output.
  for (int i = L - 1; i >= 0; --i) {
    if (i <= L - 2) {
      // Pooling path and skip path meet at the (post-dropout) block output.
      for (std::size_t q = 0; q < ga.size(); ++q) ga[q] += ws.dskip[i][q];
    }
    if (enc_has_dropout(i)) {
      dropout_backward(ga, ws.enc_drop_mask[i], gb);
      std::swap(ga, gb);
    }
    if (i == L - 1) add_tap_grad(0);
    if (i > 0) {
      enc_[i].backward(ga, ws.enc_cache[i], &gb);
      maxpool2_backward(gb, ws.pool_cache[i - 1], ga);
    } else {
      enc_[i].backward(ga, ws.enc_cache[i], nullptr);
    }
  }
}

template <typename T>
std::vector<const Tensor<T>*> UNet<T>::taps(const Workspace& ws) const {
  const int L = cfg_.depth;
  std::vector<const Tensor<T>*> out;
  out.push_back(&ws.enc_out[L - 1]);
  for (int i = L - 2; i >= 0; --i) out.push_back(&ws.dec_out[i]);
  return out;
}

template <typename T>
ForwardResult<T> UNet<T>::forward(const Tensor<T>& images,
                                  bool stochastic_dropout, Rng* rng) const {
  Workspace ws;
  return forward(images, stochastic_dropout, rng, ws);
}

template <typename T>
ForwardResult<T> UNet<T>::forward(const Tensor<T>& images,
                                  bool stochastic_dropout, Rng* rng,
                                  Workspace& ws) const {
  check_input(images, cfg_.depth);
  if (stochastic_dropout && !rng)
    throw std::invalid_argument("unet: stochastic dropout needs an RNG");
  const int L = cfg_.depth;
  const T rate = static_cast<T>(cfg_.dropout_rate);

  ws.pooled.resize(L > 1 ? L - 1 : 0);
  ws.enc_out.resize(L);
  ws.enc_cache.resize(L);
  ws.enc_drop.resize(L);
  ws.up.resize(L - 1);
  ws.cat.resize(L - 1);
  ws.dec_out.resize(L - 1);
  ws.dec_cache.resize(L - 1);

  const Tensor<T>* cur = &images;
  for (int i = 0; i < L; ++i) {
    if (i > 0) {
      maxpool2_forward(*cur, ws.pooled[i - 1],
                       static_cast<MaxPoolCache<T>*>(nullptr));
      cur = &ws.pooled[i - 1];
    }
    enc_[i].forward_eval(*cur, ws.enc_out[i], ws.enc_cache[i]);
    if (stochastic_dropout && enc_has_dropout(i)) {
      dropout_forward<T>(ws.enc_out[i], ws.enc_drop[i], rate, *rng, nullptr);
      cur = &ws.enc_drop[i];
    } else {
      cur = &ws.enc_out[i];
    }
  }

  ForwardResult<T> res;
  // Taps and the latent vector come from the pre-dropout block outputs.
  res.feature_taps.push_back(ws.enc_out[L - 1]);
  gap_forward(ws.enc_out[L - 1], res.bottleneck);

  for (int i = L - 2; i >= 0; --i) {
    up_[i].forward(*cur, ws.up[i], nullptr);
    const Tensor<T>& skip = (stochastic_dropout && enc_has_dropout(i))
                                ? ws.enc_drop[i]
                                : ws.enc_out[i];
    concat_channels(skip, ws.up[i], ws.cat[i]);
    dec_[i].forward_eval(ws.cat[i], ws.dec_out[i], ws.dec_cache[i]);
    if (i == L - 2 && stochastic_dropout && rate > T(0)) {
      dropout_forward<T>(ws.dec_out[i], ws.dec_drop, rate, *rng, nullptr);
      cur = &ws.dec_drop;
    } else {
      cur = &ws.dec_out[i];
    }
    res.feature_taps.push_back(ws.dec_out[i]);
  }

  head_.forward(*cur, res.logits, nullptr);
  res.probabilities = softmax_channels(res.logits);
  return res;
}

template class ConvBlock<float>;
template class ConvBlock<double>;
template class UNet<float>;
template class UNet<double>;

}  // namespace alseg::nn
