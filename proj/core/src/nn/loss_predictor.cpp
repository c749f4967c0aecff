#include "alseg/nn/loss_predictor.hpp"

#include <stdexcept>

namespace alseg::nn {

void LossPredictorConfig::validate() const {
  if (tap_projection_dim < 1)
    throw std::invalid_argument("loss predictor: projection dim >= 1");
  if (!(margin > 0.0)) throw std::invalid_argument("loss predictor: margin > 0");
  if (loss_weight < 0.0)
    throw std::invalid_argument("loss predictor: loss_weight >= 0");
}

template <typename T>
LossPredictor<T>::LossPredictor(const LossPredictorConfig& cfg,
                                std::vector<std::size_t> tap_channels)
    : cfg_(cfg), tap_channels_(std::move(tap_channels)) {
  cfg_.validate();
  if (tap_channels_.empty())
    throw std::invalid_argument("loss predictor: no taps configured");
  const std::size_t proj = static_cast<std::size_t>(cfg_.tap_projection_dim);
  for (std::size_t t = 0; t < tap_channels_.size(); ++t)
    proj_.emplace_back("losspred.proj" + std::to_string(t), tap_channels_[t],
                       proj);
  head_ = Linear<T>("losspred.head", proj * tap_channels_.size(), 1);
}

template <typename T>
void LossPredictor<T>::forward(const std::vector<const Tensor<T>*>& taps,
                               Workspace& ws, Tensor<T>& pred) const {
  if (taps.size() != tap_channels_.size())
    throw std::invalid_argument("loss predictor: tap count mismatch");
  const std::size_t nt = taps.size();
  ws.gap.resize(nt);
  ws.proj_cache.resize(nt);
  ws.proj_out.resize(nt);
  ws.act.resize(nt);
  ws.tap_shapes.resize(nt);

  const std::size_t n = taps[0]->dim(0);
  const std::size_t proj = static_cast<std::size_t>(cfg_.tap_projection_dim);
  for (std::size_t t = 0; t < nt; ++t) {
    if (taps[t]->ndim() != 4 || taps[t]->dim(0) != n ||
        taps[t]->dim(1) != tap_channels_[t])
      throw std::invalid_argument("loss predictor: tap shape mismatch");
    ws.tap_shapes[t] = taps[t]->shape();
    gap_forward(*taps[t], ws.gap[t]);
    proj_[t].forward(ws.gap[t], ws.proj_out[t], &ws.proj_cache[t]);
    leaky_relu_forward(ws.proj_out[t], ws.act[t], T(0));
  }

  ensure_shape(ws.concat, {n, proj * nt});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < nt; ++t)
      std::copy(ws.act[t].data() + i * proj, ws.act[t].data() + (i + 1) * proj,
                ws.concat.data() + i * proj * nt + t * proj);

  head_.forward(ws.concat, ws.head_out, &ws.head_cache);
  ensure_shape(pred, {n});
  for (std::size_t i = 0; i < n; ++i) pred[i] = ws.head_out[i];
}

template <typename T>
void LossPredictor<T>::backward(const Tensor<T>& dpred, Workspace& ws,
                                std::vector<Tensor<T>>* tap_grads) {
  const std::size_t nt = tap_channels_.size();
  const std::size_t n = dpred.dim(0);
  const std::size_t proj = static_cast<std::size_t>(cfg_.tap_projection_dim);

  ensure_shape(ws.dhead, {n, std::size_t(1)});
  for (std::size_t i = 0; i < n; ++i) ws.dhead[i] = dpred[i];
  head_.backward(ws.dhead, ws.head_cache, &ws.dconcat);

  if (tap_grads) tap_grads->resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    ensure_shape(ws.dact, {n, proj});
    for (std::size_t i = 0; i < n; ++i)
      std::copy(ws.dconcat.data() + i * proj * nt + t * proj,
                ws.dconcat.data() + i * proj * nt + (t + 1) * proj,
                ws.dact.data() + i * proj);
    leaky_relu_backward(ws.dact, ws.act[t], ws.dproj, T(0));
    proj_[t].backward(ws.dproj, ws.proj_cache[t],
                      tap_grads ? &ws.dgap : nullptr);
    if (tap_grads) gap_backward(ws.dgap, ws.tap_shapes[t], (*tap_grads)[t]);
  }
}

template <typename T>
void LossPredictor<T>::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : proj_) p.init_he(rng);
  head_.init_he(rng);
}

template <typename T>
std::vector<Param<T>*> LossPredictor<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& p : proj_)
    for (auto* q : p.params()) out.push_back(q);
  for (auto* q : head_.params()) out.push_back(q);
  return out;
}

template <typename T>
std::size_t LossPredictor<T>::parameter_count() const {
  std::size_t n = 0;
  for (auto* p : const_cast<LossPredictor<T>*>(this)->params())
    n += p->value.size();
  return n;
}

template <typename T>
void LossPredictor<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <typename T>
T ranking_loss(const std::vector<T>& pred, const std::vector<T>& truth,
               T margin, std::vector<T>* dpred) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("ranking_loss: size mismatch");
  if (!(margin > T(0))) throw std::invalid_argument("ranking_loss: margin > 0");
  if (dpred) dpred->assign(pred.size(), T(0));

  const std::size_t pairs = pred.size() / 2;  // odd trailing element dropped
  if (pairs == 0) return T(0);

  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t i = 2 * p, j = 2 * p + 1;
    const double dt = static_cast<double>(truth[i]) - static_cast<double>(truth[j]);
    const double s = dt > 0.0 ? 1.0 : (dt < 0.0 ? -1.0 : 0.0);
    const double v = -s * (static_cast<double>(pred[i]) -
                           static_cast<double>(pred[j])) +
                     static_cast<double>(margin);
    if (v > 0.0) {
      total += v;
      if (dpred) {
        (*dpred)[i] += static_cast<T>(-s * inv);
        (*dpred)[j] += static_cast<T>(s * inv);
      }
    }
  }
  return static_cast<T>(total * inv);
}

template class LossPredictor<float>;
template class LossPredictor<double>;
template float ranking_loss<float>(const std::vector<float>&,
                                   const std::vector<float>&, float,
                                   std::vector<float>*);
template double ranking_loss<double>(const std::vector<double>&,
                                     const std::vector<double>&, double,
                                     std::vector<double>*);

}  // namespace alseg::nn
