#include <doctest.h>

#include <cmath>

#include "alseg/nn/layers.hpp"
#include "alseg/rng.hpp"
#include "testutil/gradcheck.hpp"

using namespace alseg;
using namespace alseg::nn;
using testutil::fd_grad;
using testutil::rel_err;

namespace {

void randomize(Tensor<double>& t, Rng& rng, double scale = 1.0) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, scale);
}

// Weighted-sum functional over the layer output turns any layer into a
// scalar map whose analytic gradient is exercised by backward(w).
struct Probe {
  Tensor<double> w;
  explicit Probe(const Tensor<double>& y) {
    Rng rng(99);
    w.resize(y.shape());
    randomize(w, rng);
  }
  double operator()(const Tensor<double>& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  }
};

}  // namespace

TEST_CASE("conv2d 3x3 gradients match finite differences") {
  Rng rng(1);
  Conv2d<double> conv("c", 3, 4, 3);
  conv.init_he(rng);
  Tensor<double> x({2, 3, 6, 6});
  randomize(x, rng);

  Conv2d<double>::Cache cache;
  Tensor<double> y;
  conv.forward(x, y, &cache);
  Probe probe(y);

  for (auto* p : conv.params()) p->zero_grad();
  Tensor<double> dx;
  conv.backward(probe.w, cache, &dx);

  auto eval_x = [&] {
    Tensor<double> yy;
    conv.forward(x, yy, nullptr);
    return probe(yy);
  };
  Rng pick(5);
  for (int i = 0; i < 12; ++i) {
    const std::size_t idx = pick.uniform_index(x.size());
    CHECK(rel_err(dx[idx], fd_grad(x, idx, eval_x)) < 1e-6);
  }
  for (auto* p : conv.params()) {
    for (int i = 0; i < 8; ++i) {
      const std::size_t idx = pick.uniform_index(p->value.size());
      auto eval_w = [&] {
        Tensor<double> yy;
        conv.forward(x, yy, nullptr);
        return probe(yy);
      };
      CHECK(rel_err(p->grad[idx], fd_grad(p->value, idx, eval_w)) < 1e-6);
    }
  }
}

TEST_CASE("conv2d 1x1 gradients match finite differences") {
  Rng rng(2);
  Conv2d<double> conv("h", 4, 2, 1);
  conv.init_he(rng);
  Tensor<double> x({2, 4, 5, 5});
  randomize(x, rng);

  Conv2d<double>::Cache cache;
  Tensor<double> y;
  conv.forward(x, y, &cache);
  Probe probe(y);
  for (auto* p : conv.params()) p->zero_grad();
  Tensor<double> dx;
  conv.backward(probe.w, cache, &dx);

  Rng pick(6);
  auto eval = [&] {
    Tensor<double> yy;
    conv.forward(x, yy, nullptr);
    return probe(yy);
  };
  for (int i = 0; i < 10; ++i) {
    const std::size_t idx = pick.uniform_index(x.size());
    CHECK(rel_err(dx[idx], fd_grad(x, idx, eval)) < 1e-6);
  }
}

TEST_CASE("conv transpose gradients match finite differences") {
  Rng rng(3);
  ConvTranspose2d<double> up("u", 4, 3);
  up.init_he(rng);
  Tensor<double> x({2, 4, 3, 3});
  randomize(x, rng);

  ConvTranspose2d<double>::Cache cache;
  Tensor<double> y;
  up.forward(x, y, &cache);
  CHECK(y.shape() == std::vector<std::size_t>{2, 3, 6, 6});
  Probe probe(y);
  for (auto* p : up.params()) p->zero_grad();
  Tensor<double> dx;
  up.backward(probe.w, cache, &dx);

  Rng pick(7);
  auto eval = [&] {
    Tensor<double> yy;
    up.forward(x, yy, nullptr);
    return probe(yy);
  };
  for (int i = 0; i < 10; ++i) {
    const std::size_t idx = pick.uniform_index(x.size());
    CHECK(rel_err(dx[idx], fd_grad(x, idx, eval)) < 1e-6);
  }
  for (auto* p : up.params())
    for (int i = 0; i < 6; ++i) {
      const std::size_t idx = pick.uniform_index(p->value.size());
      CHECK(rel_err(p->grad[idx], fd_grad(p->value, idx, eval)) < 1e-6);
    }
}

TEST_CASE("batch norm training-mode gradients match finite differences") {
  Rng rng(4);
  BatchNorm2d<double> bn("b", 3);
  // Non-trivial affine parameters.
  for (auto* p : bn.params())
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] = rng.normal(1.0, 0.2);
  Tensor<double> x({4, 3, 4, 4});
  randomize(x, rng);

  // Freeze running stats for the probe evaluations: forward_train updates
  // them but they do not feed the train-mode output.
  BatchNorm2d<double>::Cache cache;
  Tensor<double> y;
  bn.forward_train(x, y, cache);
  Probe probe(y);
  for (auto* p : bn.params()) p->zero_grad();
  Tensor<double> dx;
  bn.backward(probe.w, cache, dx);

  auto eval = [&] {
    BatchNorm2d<double>::Cache c2;
    Tensor<double> yy;
    bn.forward_train(x, yy, c2);
    return probe(yy);
  };
  Rng pick(8);
  for (int i = 0; i < 12; ++i) {
    const std::size_t idx = pick.uniform_index(x.size());
    CHECK(rel_err(dx[idx], fd_grad(x, idx, eval, 1e-5)) < 1e-5);
  }
  for (auto* p : bn.params())
    for (int i = 0; i < 3; ++i) {
      const std::size_t idx = pick.uniform_index(p->value.size());
      CHECK(rel_err(p->grad[idx], fd_grad(p->value, idx, eval, 1e-5)) < 1e-5);
    }
}

TEST_CASE("batch norm eval mode uses running statistics") {
  Rng rng(5);
  BatchNorm2d<double> bn("b", 2);
  Tensor<double> x({3, 2, 2, 2});
  randomize(x, rng, 2.0);
  BatchNorm2d<double>::Cache cache;
  Tensor<double> y;
  bn.forward_train(x, y, cache);

  // After one train pass, eval output must be an affine map of the input
  // using the running estimates, independent of the batch.
  Tensor<double> single({1, 2, 2, 2});
  for (std::size_t i = 0; i < single.size(); ++i) single[i] = x[i];
  Tensor<double> ye;
  bn.forward_eval(single, ye);
  const double rm = bn.running_mean()[0];
  const double rv = bn.running_var()[0];
  const double want = (single[0] - rm) / std::sqrt(rv + 1e-5);
  CHECK(ye[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("maxpool forward/backward") {
  Tensor<double> x({1, 1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
  Tensor<double> y;
  MaxPoolCache<double> cache;
  maxpool2_forward(x, y, &cache);
  CHECK(y.shape() == std::vector<std::size_t>{1, 1, 2, 2});
  CHECK(y[0] == 5.0);   // max of {0,1,4,5}
  CHECK(y[3] == 15.0);

  Tensor<double> dy({1, 1, 2, 2});
  dy.fill(1.0);
  Tensor<double> dx;
  maxpool2_backward(dy, cache, dx);
  CHECK(dx[5] == 1.0);
  CHECK(dx[0] == 0.0);
  CHECK(dx[15] == 1.0);
}

TEST_CASE("dropout scales kept activations and masks gradients") {
  Rng rng(6);
  Tensor<double> x({1, 1, 32, 32});
  x.fill(1.0);
  Tensor<double> y, mask;
  dropout_forward(x, y, 0.5, rng, &mask);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK((y[i] == 0.0 || y[i] == doctest::Approx(2.0)));
    kept += y[i] != 0.0;
  }
  CHECK(kept > 400);
  CHECK(kept < 620);

  Tensor<double> dy(y.shape()), dx;
  dy.fill(3.0);
  dropout_backward(dy, mask, dx);
  for (std::size_t i = 0; i < dx.size(); ++i)
    CHECK(dx[i] == (y[i] == 0.0 ? 0.0 : doctest::Approx(6.0)));
}

TEST_CASE("linear layer gradients match finite differences") {
  Rng rng(7);
  Linear<double> lin("l", 6, 3);
  lin.init_he(rng);
  Tensor<double> x({4, 6});
  randomize(x, rng);

  Linear<double>::Cache cache;
  Tensor<double> y;
  lin.forward(x, y, &cache);
  Probe probe(y);
  for (auto* p : lin.params()) p->zero_grad();
  Tensor<double> dx;
  lin.backward(probe.w, cache, &dx);

  auto eval = [&] {
    Tensor<double> yy;
    lin.forward(x, yy, nullptr);
    return probe(yy);
  };
  Rng pick(9);
  for (int i = 0; i < 8; ++i) {
    const std::size_t idx = pick.uniform_index(x.size());
    CHECK(rel_err(dx[idx], fd_grad(x, idx, eval)) < 1e-7);
  }
  for (auto* p : lin.params())
    for (int i = 0; i < 4; ++i) {
      const std::size_t idx = pick.uniform_index(p->value.size());
      CHECK(rel_err(p->grad[idx], fd_grad(p->value, idx, eval)) < 1e-7);
    }
}

TEST_CASE("concat/split round trip") {
  Rng rng(8);
  Tensor<double> a({2, 3, 4, 4}), b({2, 2, 4, 4}), y;
  randomize(a, rng);
  randomize(b, rng);
  concat_channels(a, b, y);
  CHECK(y.dim(1) == 5);
  CHECK(y.at4(1, 4, 2, 2) == b.at4(1, 1, 2, 2));
  Tensor<double> da({2, 3, 4, 4}), db({2, 2, 4, 4});
  split_channels(y, da, db);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(da[i] == a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(db[i] == b[i]);
}

TEST_CASE("gap averages over space") {
  Tensor<double> x({1, 2, 2, 2});
  for (std::size_t i = 0; i < 8; ++i) x[i] = static_cast<double>(i);
  Tensor<double> y;
  gap_forward(x, y);
  CHECK(y[0] == doctest::Approx(1.5));
  CHECK(y[1] == doctest::Approx(5.5));
  Tensor<double> dy({1, 2}), dx;
  dy[0] = 4.0;
  dy[1] = 8.0;
  gap_backward(dy, x.shape(), dx);
  CHECK(dx[0] == doctest::Approx(1.0));
  CHECK(dx[7] == doctest::Approx(2.0));
}
