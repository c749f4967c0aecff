#include <doctest.h>

#include <cmath>

#include "alseg/nn/losses.hpp"
#include "alseg/nn/loss_predictor.hpp"
#include "alseg/nn/unet.hpp"
#include "alseg/rng.hpp"
#include "testutil/gradcheck.hpp"

using namespace alseg;
using namespace alseg::nn;
using testutil::rel_err;

namespace {

Tensor<float> random_images(std::size_t n, std::size_t h, std::size_t w,
                            std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> x({n, 1, h, w});
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<float>(rng.uniform());
  return x;
}

}  // namespace

TEST_CASE("probabilities are per-pixel distributions") {
  SegModelConfig cfg{3, 4, 3, 0.5, 0.01};
  UNet<float> net(cfg);
  net.init_weights(1);
  const auto x = random_images(2, 16, 16, 2);
  const auto res = net.forward(x, false, nullptr);
  const std::size_t hw = 16 * 16;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t p = 0; p < hw; ++p) {
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) {
        const float v = res.probabilities[(n * 3 + c) * hw + p];
        CHECK(v >= 0.0f);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-5);
    }
  CHECK(res.feature_taps.size() == 3);
  CHECK(res.bottleneck.shape() == std::vector<std::size_t>{2, 16});
}

TEST_CASE("deterministic forward is repeatable; stochastic dropout is not") {
  SegModelConfig cfg{3, 4, 2, 0.5, 0.01};
  UNet<float> net(cfg);
  net.init_weights(3);
  const auto x = random_images(1, 16, 16, 4);

  const auto a = net.forward(x, false, nullptr);
  const auto b = net.forward(x, false, nullptr);
  for (std::size_t i = 0; i < a.logits.size(); ++i)
    CHECK(a.logits[i] == b.logits[i]);

  Rng r1(10), r2(11);
  const auto s1 = net.forward(x, true, &r1);
  const auto s2 = net.forward(x, true, &r2);
  bool differs = false;
  for (std::size_t i = 0; i < s1.logits.size() && !differs; ++i)
    differs = s1.logits[i] != s2.logits[i];
  CHECK(differs);

  // Same RNG seed reproduces the stochastic pass exactly.
  Rng r3(10);
  const auto s3 = net.forward(x, true, &r3);
  for (std::size_t i = 0; i < s1.logits.size(); ++i)
    CHECK(s1.logits[i] == s3.logits[i]);
}

TEST_CASE("batch order equivariance in inference mode") {
  SegModelConfig cfg{3, 4, 2, 0.5, 0.01};
  UNet<float> net(cfg);
  net.init_weights(5);
  const auto x = random_images(3, 16, 16, 6);
  Tensor<float> xr({3, 1, 16, 16});
  const std::size_t hw = 16 * 16;
  const int perm[3] = {2, 0, 1};
  for (int n = 0; n < 3; ++n)
    std::copy(x.data() + perm[n] * hw, x.data() + (perm[n] + 1) * hw,
              xr.data() + n * hw);

  const auto a = net.forward(x, false, nullptr);
  const auto b = net.forward(xr, false, nullptr);
  const std::size_t chw = 2 * hw;
  for (int n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < chw; ++i)
      CHECK(b.logits[n * chw + i] == a.logits[perm[n] * chw + i]);
}

TEST_CASE("parameter count is a pure function of the config") {
  CHECK(UNet<float>(SegModelConfig{}).parameter_count() == 483170);
  CHECK(UNet<float>(SegModelConfig{3, 4, 2, 0.0, 0.01}).parameter_count() == 7562);
  LossPredictorConfig lp;
  UNet<float> net{SegModelConfig{}};
  CHECK(LossPredictor<float>(lp, net.tap_channels()).parameter_count() == 7937);
}

TEST_CASE("tap channels are bottleneck-first") {
  UNet<float> net(SegModelConfig{4, 16, 2, 0.5, 0.01});
  CHECK(net.tap_channels() == std::vector<std::size_t>{128, 64, 32, 16});
}

TEST_CASE("input validation") {
  UNet<float> net(SegModelConfig{3, 4, 2, 0.5, 0.01});
  net.init_weights(1);
  Tensor<float> bad({1, 2, 16, 16});
  CHECK_THROWS(net.forward(bad, false, nullptr));
  Tensor<float> odd({1, 1, 10, 10});  // not divisible by 2^(depth-1)
  CHECK_THROWS(net.forward(odd, false, nullptr));
  Tensor<float> ok({1, 1, 16, 16});
  CHECK_THROWS(net.forward(ok, true, nullptr));  // stochastic needs an RNG
  CHECK_THROWS(UNet<float>(SegModelConfig{0, 4, 2, 0.5, 0.01}));
  CHECK_THROWS(UNet<float>(SegModelConfig{3, 4, 1, 0.5, 0.01}));
  CHECK_THROWS(UNet<float>(SegModelConfig{3, 4, 2, 1.0, 0.01}));
}

TEST_CASE("whole-network gradient check on an 8x8 input") {
  // Toy-width UNet + loss predictor, dropout disabled so the functional is
  // deterministic; double precision throughout.
  SegModelConfig cfg{3, 4, 2, 0.0, 0.01};
  UNet<double> net(cfg);
  net.init_weights(11);
  LossPredictorConfig lp_cfg;
  lp_cfg.tap_projection_dim = 8;
  lp_cfg.detach_features = false;
  LossPredictor<double> lp(lp_cfg, net.tap_channels());
  lp.init_weights(12);
  const double lambda = lp_cfg.loss_weight;

  Rng rng(13);
  Tensor<double> x({4, 1, 8, 8});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
  Tensor<std::uint8_t> targets({4, 8, 8});
  for (std::size_t i = 0; i < targets.size(); ++i)
    targets[i] = static_cast<std::uint8_t>(rng.uniform_index(2));

  // Truth side of the ranking loss is a frozen constant (it is a target,
  // not a differentiable path).
  std::vector<double> truth;
  {
    UNet<double>::Workspace ws;
    Rng d(0);
    net.train_forward(x, d, ws);
    truth = softmax_ce<double>(ws.logits, targets, nullptr).per_image;
  }

  auto total_loss = [&]() {
    UNet<double>::Workspace ws;
    Rng d(0);
    net.train_forward(x, d, ws);
    const CeOut ce = softmax_ce<double>(ws.logits, targets, nullptr);
    typename LossPredictor<double>::Workspace lpws;
    Tensor<double> pred;
    lp.forward(net.taps(ws), lpws, pred);
    std::vector<double> pv(pred.data(), pred.data() + pred.size());
    const double rank = ranking_loss<double>(pv, truth, lp_cfg.margin, static_cast<std::vector<double>*>(nullptr));
    return ce.mean + lambda * rank;
  };

  // Analytic pass.
  net.zero_grad();
  lp.zero_grad();
  UNet<double>::Workspace ws;
  Rng d(0);
  net.train_forward(x, d, ws);
  Tensor<double> dlogits;
  softmax_ce(ws.logits, targets, &dlogits);
  typename LossPredictor<double>::Workspace lpws;
  Tensor<double> pred;
  lp.forward(net.taps(ws), lpws, pred);
  std::vector<double> pv(pred.data(), pred.data() + pred.size());
  std::vector<double> dpred;
  ranking_loss<double>(pv, truth, lp_cfg.margin, &dpred);
  Tensor<double> dpred_t({pv.size()});
  for (std::size_t i = 0; i < pv.size(); ++i) dpred_t[i] = lambda * dpred[i];
  std::vector<Tensor<double>> tap_grads;
  lp.backward(dpred_t, lpws, &tap_grads);
  net.train_backward(dlogits, &tap_grads, ws);

  auto params = net.params();
  for (auto* p : lp.params()) params.push_back(p);

  Rng pick(17);
  int checked = 0, with_rank_path = 0;
  while (checked < 24) {
    auto* p = params[pick.uniform_index(params.size())];
    const std::size_t idx = pick.uniform_index(p->value.size());
    const double analytic = p->grad[idx];
    const double fd = testutil::fd_grad(p->value, idx, total_loss, 1e-6);
    if (std::abs(analytic) < 1e-10 && std::abs(fd) < 1e-10) continue;
    CHECK(rel_err(analytic, fd) < 1e-2);
    if (p->name.rfind("losspred", 0) == 0) ++with_rank_path;
    ++checked;
  }
  CHECK(checked >= 20);
  (void)with_rank_path;
}
