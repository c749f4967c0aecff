#include "alseg/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alseg/nn/gemm.hpp"

namespace alseg::nn {

namespace {

// im2col for stride-1 odd-kernel convolution with zero padding k/2.
// Output layout: (K = C*k*k) rows by (H*W) columns for one sample.
template <typename T>
void im2col(const T* x, std::size_t c, std::size_t h, std::size_t w,
            std::size_t k, T* cols) {
  const long pad = static_cast<long>(k / 2);
  const std::size_t hw = h * w;
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = cols + ((ci * k + ky) * k + kx) * hw;
        const long oy = static_cast<long>(ky) - pad;
        const long ox = static_cast<long>(kx) - pad;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + oy;
          T* dst = row + y * w;
          if (sy < 0 || sy >= static_cast<long>(h)) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          const T* src = x + ci * hw + static_cast<std::size_t>(sy) * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + ox;
            dst[xx] = (sx < 0 || sx >= static_cast<long>(w))
                          ? T(0)
                          : src[static_cast<std::size_t>(sx)];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, std::size_t c, std::size_t h, std::size_t w,
                std::size_t k, T* x) {
  const long pad = static_cast<long>(k / 2);
  const std::size_t hw = h * w;
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = cols + ((ci * k + ky) * k + kx) * hw;
        const long oy = static_cast<long>(ky) - pad;
        const long ox = static_cast<long>(kx) - pad;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + oy;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          T* dst = x + ci * hw + static_cast<std::size_t>(sy) * w;
          const T* src = row + y * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + ox;
            if (sx >= 0 && sx < static_cast<long>(w))
              dst[static_cast<std::size_t>(sx)] += src[xx];
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, std::size_t in_ch, std::size_t out_ch,
                  std::size_t ksize)
    : in_ch_(in_ch), out_ch_(out_ch), k_(ksize) {
  if (ksize != 1 && ksize != 3)
    throw std::invalid_argument("Conv2d: kernel must be 1 or 3");
  weight_.init(name + ".weight", {out_ch, in_ch * ksize * ksize});
  bias_.init(name + ".bias", {out_ch});
}

template <typename T>
void Conv2d<T>::forward(const Tensor<T>& x, Tensor<T>& y, Cache* cache) const {
  if (x.ndim() != 4 || x.dim(1) != in_ch_)
    throw std::invalid_argument("Conv2d: bad input shape");
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
  const std::size_t kk = in_ch_ * k_ * k_;
  ensure_shape(y, {n, out_ch_, h, w});

  Tensor<T> local_cols;
  Tensor<T>& cols = cache ? cache->cols : local_cols;
  if (cache) cache->in_shape = x.shape();

  if (k_ == 1) {
    // cols is just the input; keep a copy only when backward needs it.
    if (cache) cols = x;
    for (std::size_t i = 0; i < n; ++i) {
      gemm<T>(false, false, out_ch_, hw, kk, T(1), weight_.value.data(), kk,
              x.data() + i * in_ch_ * hw, hw, T(0), y.data() + i * out_ch_ * hw,
              hw);
    }
  } else {
    ensure_shape(cols, {n, kk, hw});
    for (std::size_t i = 0; i < n; ++i) {
      T* c = cols.data() + i * kk * hw;
      im2col(x.data() + i * in_ch_ * hw, in_ch_, h, w, k_, c);
      gemm<T>(false, false, out_ch_, hw, kk, T(1), weight_.value.data(), kk, c,
              hw, T(0), y.data() + i * out_ch_ * hw, hw);
    }
  }
  // Bias broadcast.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t co = 0; co < out_ch_; ++co) {
      T* dst = y.data() + (i * out_ch_ + co) * hw;
      const T b = bias_.value[co];
      for (std::size_t p = 0; p < hw; ++p) dst[p] += b;
    }
}

template <typename T>
void Conv2d<T>::backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>* dx) {
  const std::size_t n = cache.in_shape[0], h = cache.in_shape[2],
                    w = cache.in_shape[3], hw = h * w;
  const std::size_t kk = in_ch_ * k_ * k_;

  for (std::size_t i = 0; i < n; ++i) {
    const T* dyp = dy.data() + i * out_ch_ * hw;
    const T* c = cache.cols.data() + i * kk * hw;
    // dW += dy . cols^T
    gemm<T>(false, true, out_ch_, kk, hw, T(1), dyp, hw, c, hw, T(1),
            weight_.grad.data(), kk);
    for (std::size_t co = 0; co < out_ch_; ++co) {
      double s = 0.0;
      const T* p = dyp + co * hw;
      for (std::size_t q = 0; q < hw; ++q) s += static_cast<double>(p[q]);
      bias_.grad[co] += static_cast<T>(s);
    }
  }
  if (!dx) return;

  ensure_shape(*dx, cache.in_shape);
  if (k_ == 1) {
    for (std::size_t i = 0; i < n; ++i)
      gemm<T>(true, false, in_ch_, hw, out_ch_, T(1), weight_.value.data(), kk,
              dy.data() + i * out_ch_ * hw, hw, T(0),
              dx->data() + i * in_ch_ * hw, hw);
  } else {
    Tensor<T> dcols({kk, hw});
    dx->fill(T(0));
    for (std::size_t i = 0; i < n; ++i) {
      gemm<T>(true, false, kk, hw, out_ch_, T(1), weight_.value.data(), kk,
              dy.data() + i * out_ch_ * hw, hw, T(0), dcols.data(), hw);
      col2im_add(dcols.data(), in_ch_, h, w, k_, dx->data() + i * in_ch_ * hw);
    }
  }
}

template <typename T>
void Conv2d<T>::init_he(Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_ch_ * k_ * k_));
  for (std::size_t i = 0; i < weight_.value.size(); ++i)
    weight_.value[i] = static_cast<T>(rng.normal(0.0, std));
  bias_.value.fill(T(0));
}

// ---------------------------------------------------------------------------
// ConvTranspose2d (kernel 2, stride 2)

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(const std::string& name, std::size_t in_ch,
                                    std::size_t out_ch)
    : in_ch_(in_ch), out_ch_(out_ch) {
  weight_.init(name + ".weight", {in_ch, out_ch * 4});
  bias_.init(name + ".bias", {out_ch});
}

template <typename T>
void ConvTranspose2d<T>::forward(const Tensor<T>& x, Tensor<T>& y,
                                 Cache* cache) const {
  if (x.ndim() != 4 || x.dim(1) != in_ch_)
    throw std::invalid_argument("ConvTranspose2d: bad input shape");
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
  const std::size_t oh = 2 * h, ow = 2 * w;
  ensure_shape(y, {n, out_ch_, oh, ow});
  if (cache) cache->x = x;

  Tensor<T> cols({out_ch_ * 4, hw});
  for (std::size_t i = 0; i < n; ++i) {
    // cols = W^T . x_i
    gemm<T>(true, false, out_ch_ * 4, hw, in_ch_, T(1), weight_.value.data(),
            out_ch_ * 4, x.data() + i * in_ch_ * hw, hw, T(0), cols.data(), hw);
    for (std::size_t co = 0; co < out_ch_; ++co) {
      const T b = bias_.value[co];
      for (std::size_t dy2 = 0; dy2 < 2; ++dy2)
        for (std::size_t dx2 = 0; dx2 < 2; ++dx2) {
          const T* src = cols.data() + ((co * 2 + dy2) * 2 + dx2) * hw;
          for (std::size_t yy = 0; yy < h; ++yy) {
            T* dst = y.data() + ((i * out_ch_ + co) * oh + (2 * yy + dy2)) * ow + dx2;
            const T* s = src + yy * w;
            for (std::size_t xx = 0; xx < w; ++xx) dst[2 * xx] = s[xx] + b;
          }
        }
    }
  }
}

template <typename T>
void ConvTranspose2d<T>::backward(const Tensor<T>& dy, const Cache& cache,
                                  Tensor<T>* dx) {
  const Tensor<T>& x = cache.x;
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
  const std::size_t oh = 2 * h, ow = 2 * w;

  Tensor<T> dcols({out_ch_ * 4, hw});
  if (dx) ensure_shape(*dx, x.shape());

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t co = 0; co < out_ch_; ++co) {
      double bsum = 0.0;
      for (std::size_t dy2 = 0; dy2 < 2; ++dy2)
        for (std::size_t dx2 = 0; dx2 < 2; ++dx2) {
          T* dst = dcols.data() + ((co * 2 + dy2) * 2 + dx2) * hw;
          for (std::size_t yy = 0; yy < h; ++yy) {
            const T* src =
                dy.data() + ((i * out_ch_ + co) * oh + (2 * yy + dy2)) * ow + dx2;
            for (std::size_t xx = 0; xx < w; ++xx) {
              dst[yy * w + xx] = src[2 * xx];
              bsum += static_cast<double>(src[2 * xx]);
            }
          }
        }
      bias_.grad[co] += static_cast<T>(bsum);
    }
    // dW += x_i . dcols^T
    gemm<T>(false, true, in_ch_, out_ch_ * 4, hw, T(1),
            x.data() + i * in_ch_ * hw, hw, dcols.data(), hw, T(1),
            weight_.grad.data(), out_ch_ * 4);
    if (dx)
      gemm<T>(false, false, in_ch_, hw, out_ch_ * 4, T(1), weight_.value.data(),
              out_ch_ * 4, dcols.data(), hw, T(0), dx->data() + i * in_ch_ * hw,
              hw);
  }
}

template <typename T>
void ConvTranspose2d<T>::init_he(Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_ch_ * 4));
  for (std::size_t i = 0; i < weight_.value.size(); ++i)
    weight_.value[i] = static_cast<T>(rng.normal(0.0, std));
  bias_.value.fill(T(0));
}

// ---------------------------------------------------------------------------
// BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(const std::string& name, std::size_t channels)
    : channels_(channels) {
  gamma_.init(name + ".gamma", {channels});
  beta_.init(name + ".beta", {channels});
  gamma_.value.fill(T(1));
  beta_.value.fill(T(0));
  running_mean_.assign(channels, T(0));
  running_var_.assign(channels, T(1));
}

template <typename T>
void BatchNorm2d<T>::forward_train(const Tensor<T>& x, Tensor<T>& y, Cache& cache) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t hw = h * w;
  const double m = static_cast<double>(n * hw);
  if (n * hw < 2)
    throw std::invalid_argument("BatchNorm2d: needs > 1 value per channel");
  constexpr double kEps = 1e-5;
  constexpr double kMomentum = 0.1;

  ensure_shape(y, x.shape());
  ensure_shape(cache.xhat, x.shape());
  cache.inv_std.assign(c, T(0));

  for (std::size_t ci = 0; ci < c; ++ci) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const T* p = x.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q) {
        sum += static_cast<double>(p[q]);
        sq += static_cast<double>(p[q]) * static_cast<double>(p[q]);
      }
    }
    const double mean = sum / m;
    const double var = std::max(0.0, sq / m - mean * mean);  // biased
    const double inv = 1.0 / std::sqrt(var + kEps);
    cache.inv_std[ci] = static_cast<T>(inv);

    const T g = gamma_.value[ci], b = beta_.value[ci];
    for (std::size_t i = 0; i < n; ++i) {
      const T* p = x.data() + (i * c + ci) * hw;
      T* xh = cache.xhat.data() + (i * c + ci) * hw;
      T* out = y.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q) {
        const T v = static_cast<T>((static_cast<double>(p[q]) - mean) * inv);
        xh[q] = v;
        out[q] = g * v + b;
      }
    }

    const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
    running_mean_[ci] = static_cast<T>((1.0 - kMomentum) *
                                           static_cast<double>(running_mean_[ci]) +
                                       kMomentum * mean);
    running_var_[ci] = static_cast<T>(
        (1.0 - kMomentum) * static_cast<double>(running_var_[ci]) +
        kMomentum * unbiased);
  }
}

template <typename T>
void BatchNorm2d<T>::forward_eval(const Tensor<T>& x, Tensor<T>& y) const {
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  constexpr double kEps = 1e-5;
  ensure_shape(y, x.shape());
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double inv =
        1.0 / std::sqrt(static_cast<double>(running_var_[ci]) + kEps);
    const double mean = static_cast<double>(running_mean_[ci]);
    const T g = gamma_.value[ci], b = beta_.value[ci];
    for (std::size_t i = 0; i < n; ++i) {
      const T* p = x.data() + (i * c + ci) * hw;
      T* out = y.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q)
        out[q] = static_cast<T>(g * ((static_cast<double>(p[q]) - mean) * inv) + b);
    }
  }
}

template <typename T>
void BatchNorm2d<T>::backward(const Tensor<T>& dy, const Cache& cache,
                              Tensor<T>& dx) {
  const std::size_t n = dy.dim(0), c = dy.dim(1), hw = dy.dim(2) * dy.dim(3);
  const double m = static_cast<double>(n * hw);
  ensure_shape(dx, dy.shape());

  for (std::size_t ci = 0; ci < c; ++ci) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const T* d = dy.data() + (i * c + ci) * hw;
      const T* xh = cache.xhat.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q) {
        sum_dy += static_cast<double>(d[q]);
        sum_dy_xhat += static_cast<double>(d[q]) * static_cast<double>(xh[q]);
      }
    }
    gamma_.grad[ci] += static_cast<T>(sum_dy_xhat);
    beta_.grad[ci] += static_cast<T>(sum_dy);

    const double g = static_cast<double>(gamma_.value[ci]);
    const double inv = static_cast<double>(cache.inv_std[ci]);
    const double k = g * inv / m;
    for (std::size_t i = 0; i < n; ++i) {
      const T* d = dy.data() + (i * c + ci) * hw;
      const T* xh = cache.xhat.data() + (i * c + ci) * hw;
      T* out = dx.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q)
        out[q] = static_cast<T>(k * (m * static_cast<double>(d[q]) - sum_dy -
                                     static_cast<double>(xh[q]) * sum_dy_xhat));
    }
  }
}

// ---------------------------------------------------------------------------
// Activations / pooling / dropout / concat

template <typename T>
void leaky_relu_forward(const Tensor<T>& x, Tensor<T>& y, T slope) {
  ensure_shape(y, x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] > T(0) ? x[i] : slope * x[i];
}

template <typename T>
void leaky_relu_backward(const Tensor<T>& dy, const Tensor<T>& y, Tensor<T>& dx,
                         T slope) {
  ensure_shape(dx, dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx[i] = y[i] > T(0) ? dy[i] : slope * dy[i];
}

template <typename T>
void maxpool2_forward(const Tensor<T>& x, Tensor<T>& y, MaxPoolCache<T>* cache) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 || w % 2) throw std::invalid_argument("maxpool2: odd spatial size");
  const std::size_t oh = h / 2, ow = w / 2;
  ensure_shape(y, {n, c, oh, ow});
  if (cache) {
    cache->argmax.resize(n * c * oh * ow);
    cache->in_shape = x.shape();
  }
  std::size_t oi = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ci = 0; ci < c; ++ci) {
      const T* plane = x.data() + (i * c + ci) * h * w;
      for (std::size_t yy = 0; yy < oh; ++yy)
        for (std::size_t xx = 0; xx < ow; ++xx, ++oi) {
          const std::size_t base = (2 * yy) * w + 2 * xx;
          std::size_t best = base;
          T bv = plane[base];
          for (const std::size_t cand :
               {base + 1, base + w, base + w + 1})
            if (plane[cand] > bv) {
              bv = plane[cand];
              best = cand;
            }
          y[oi] = bv;
          if (cache)
            cache->argmax[oi] =
                static_cast<std::uint32_t>((i * c + ci) * h * w + best);
        }
    }
}

template <typename T>
void maxpool2_backward(const Tensor<T>& dy, const MaxPoolCache<T>& cache,
                       Tensor<T>& dx) {
  ensure_shape(dx, cache.in_shape);
  dx.fill(T(0));
  for (std::size_t i = 0; i < dy.size(); ++i) dx[cache.argmax[i]] += dy[i];
}

template <typename T>
void dropout_forward(const Tensor<T>& x, Tensor<T>& y, T rate, Rng& rng,
                     Tensor<T>* mask) {
  ensure_shape(y, x.shape());
  if (rate <= T(0)) {
    y = x;
    if (mask) {
      ensure_shape(*mask, x.shape());
      mask->fill(T(1));
    }
    return;
  }
  const T keep_inv = T(1) / (T(1) - rate);
  if (mask) ensure_shape(*mask, x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T m = rng.uniform() < static_cast<double>(rate) ? T(0) : keep_inv;
    y[i] = x[i] * m;
    if (mask) (*mask)[i] = m;
  }
}

template <typename T>
void dropout_backward(const Tensor<T>& dy, const Tensor<T>& mask, Tensor<T>& dx) {
  ensure_shape(dx, dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
}

template <typename T>
void concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& y) {
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1),
                    hw = a.dim(2) * a.dim(3);
  ensure_shape(y, {n, ca + cb, a.dim(2), a.dim(3)});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(a.data() + i * ca * hw, a.data() + (i + 1) * ca * hw,
              y.data() + i * (ca + cb) * hw);
    std::copy(b.data() + i * cb * hw, b.data() + (i + 1) * cb * hw,
              y.data() + i * (ca + cb) * hw + ca * hw);
  }
}

template <typename T>
void split_channels(const Tensor<T>& dy, Tensor<T>& da, Tensor<T>& db) {
  const std::size_t n = dy.dim(0), ca = da.dim(1), cb = db.dim(1),
                    hw = dy.dim(2) * dy.dim(3);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(dy.data() + i * (ca + cb) * hw,
              dy.data() + i * (ca + cb) * hw + ca * hw, da.data() + i * ca * hw);
    std::copy(dy.data() + i * (ca + cb) * hw + ca * hw,
              dy.data() + (i + 1) * (ca + cb) * hw, db.data() + i * cb * hw);
  }
}

// ---------------------------------------------------------------------------
// Linear / GAP

template <typename T>
Linear<T>::Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim)
    : in_(in_dim), out_(out_dim) {
  weight_.init(name + ".weight", {out_dim, in_dim});
  bias_.init(name + ".bias", {out_dim});
}

template <typename T>
void Linear<T>::forward(const Tensor<T>& x, Tensor<T>& y, Cache* cache) const {
  const std::size_t n = x.dim(0);
  if (x.dim(1) != in_) throw std::invalid_argument("Linear: bad input dim");
  ensure_shape(y, {n, out_});
  if (cache) cache->x = x;
  // y = x . W^T
  gemm<T>(false, true, n, out_, in_, T(1), x.data(), in_, weight_.value.data(),
          in_, T(0), y.data(), out_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out_; ++o) y[i * out_ + o] += bias_.value[o];
}

template <typename T>
void Linear<T>::backward(const Tensor<T>& dy, const Cache& cache, Tensor<T>* dx) {
  const std::size_t n = dy.dim(0);
  // dW += dy^T . x
  gemm<T>(true, false, out_, in_, n, T(1), dy.data(), out_, cache.x.data(), in_,
          T(1), weight_.grad.data(), in_);
  for (std::size_t o = 0; o < out_; ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(dy[i * out_ + o]);
    bias_.grad[o] += static_cast<T>(s);
  }
  if (dx) {
    ensure_shape(*dx, cache.x.shape());
    gemm<T>(false, false, n, in_, out_, T(1), dy.data(), out_,
            weight_.value.data(), in_, T(0), dx->data(), in_);
  }
}

template <typename T>
void Linear<T>::init_he(Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_));
  for (std::size_t i = 0; i < weight_.value.size(); ++i)
    weight_.value[i] = static_cast<T>(rng.normal(0.0, std));
  bias_.value.fill(T(0));
}

template <typename T>
void gap_forward(const Tensor<T>& x, Tensor<T>& y) {
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  ensure_shape(y, {n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ci = 0; ci < c; ++ci) {
      double s = 0.0;
      const T* p = x.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q) s += static_cast<double>(p[q]);
      y[i * c + ci] = static_cast<T>(s / static_cast<double>(hw));
    }
}

template <typename T>
void gap_backward(const Tensor<T>& dy, const std::vector<std::size_t>& in_shape,
                  Tensor<T>& dx) {
  const std::size_t n = in_shape[0], c = in_shape[1],
                    hw = in_shape[2] * in_shape[3];
  ensure_shape(dx, in_shape);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ci = 0; ci < c; ++ci) {
      const T g = dy[i * c + ci] / static_cast<T>(hw);
      T* p = dx.data() + (i * c + ci) * hw;
      for (std::size_t q = 0; q < hw; ++q) p[q] = g;
    }
}

// ---------------------------------------------------------------------------
// Explicit instantiations

#define ALSEG_INSTANTIATE(T)                                                   \
  template class Conv2d<T>;                                                    \
  template class ConvTranspose2d<T>;                                           \
  template class BatchNorm2d<T>;                                               \
  template class Linear<T>;                                                    \
  template void leaky_relu_forward<T>(const Tensor<T>&, Tensor<T>&, T);        \
  template void leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&,     \
                                       Tensor<T>&, T);                         \
  template void maxpool2_forward<T>(const Tensor<T>&, Tensor<T>&,              \
                                    MaxPoolCache<T>*);                         \
  template void maxpool2_backward<T>(const Tensor<T>&, const MaxPoolCache<T>&, \
                                     Tensor<T>&);                              \
  template void dropout_forward<T>(const Tensor<T>&, Tensor<T>&, T, Rng&,      \
                                   Tensor<T>*);                                \
  template void dropout_backward<T>(const Tensor<T>&, const Tensor<T>&,        \
                                    Tensor<T>&);                               \
  template void concat_channels<T>(const Tensor<T>&, const Tensor<T>&,         \
                                   Tensor<T>&);                                \
  template void split_channels<T>(const Tensor<T>&, Tensor<T>&, Tensor<T>&);   \
  template void gap_forward<T>(const Tensor<T>&, Tensor<T>&);                  \
  template void gap_backward<T>(const Tensor<T>&,                              \
                                const std::vector<std::size_t>&, Tensor<T>&);

ALSEG_INSTANTIATE(float)
ALSEG_INSTANTIATE(double)

#undef ALSEG_INSTANTIATE

}  // namespace alseg::nn
