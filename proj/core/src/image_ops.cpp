#include "alseg/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline std::size_t clamp_idx(long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

}  // namespace

Grid2D<float> resize_bilinear(const Grid2D<float>& src, std::size_t out_h,
                              std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw std::invalid_argument("resize: empty target");
  if (src.h == 0 || src.w == 0) throw std::invalid_argument("resize: empty source");
  Grid2D<float> dst(out_h, out_w);
  const double sy = static_cast<double>(src.h) / out_h;
  const double sx = static_cast<double>(src.w) / out_w;
  for (std::size_t y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(fy));
    const double wy = fy - y0;
    const std::size_t ya = clamp_idx(y0, src.h), yb = clamp_idx(y0 + 1, src.h);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const long x0 = static_cast<long>(std::floor(fx));
      const double wx = fx - x0;
      const std::size_t xa = clamp_idx(x0, src.w), xb = clamp_idx(x0 + 1, src.w);
      const double top = src.at(ya, xa) * (1.0 - wx) + src.at(ya, xb) * wx;
      const double bot = src.at(yb, xa) * (1.0 - wx) + src.at(yb, xb) * wx;
      dst.at(y, x) = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return dst;
}

Grid2D<std::uint8_t> resize_nearest(const Grid2D<std::uint8_t>& src,
                                    std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw std::invalid_argument("resize: empty target");
  if (src.h == 0 || src.w == 0) throw std::invalid_argument("resize: empty source");
  Grid2D<std::uint8_t> dst(out_h, out_w);
  const double sy = static_cast<double>(src.h) / out_h;
  const double sx = static_cast<double>(src.w) / out_w;
  for (std::size_t y = 0; y < out_h; ++y) {
    const long iy = static_cast<long>(std::floor((y + 0.5) * sy));
    const std::size_t ya = clamp_idx(iy, src.h);
    for (std::size_t x = 0; x < out_w; ++x) {
      const long ix = static_cast<long>(std::floor((x + 0.5) * sx));
      dst.at(y, x) = src.at(ya, clamp_idx(ix, src.w));
    }
  }
  return dst;
}

namespace {

struct InverseRotation {
  double c, s, cy, cx;
  // Maps an output pixel to source coordinates.
  void operator()(double y, double x, double* sy, double* sx) const {
    const double dy = y - cy, dx = x - cx;
    *sy = c * dy + s * dx + cy;
    *sx = -s * dy + c * dx + cx;
  }
};

InverseRotation make_inverse(double degrees, std::size_t h, std::size_t w) {
  const double rad = degrees * kPi / 180.0;
  return InverseRotation{std::cos(rad), std::sin(rad), (h - 1) * 0.5, (w - 1) * 0.5};
}

}  // namespace

Grid2D<float> rotate_bilinear(const Grid2D<float>& src, double degrees,
                              float fill) {
  Grid2D<float> dst(src.h, src.w);
  const auto inv = make_inverse(degrees, src.h, src.w);
  for (std::size_t y = 0; y < src.h; ++y) {
    for (std::size_t x = 0; x < src.w; ++x) {
      double fy, fx;
      inv(static_cast<double>(y), static_cast<double>(x), &fy, &fx);
      const long y0 = static_cast<long>(std::floor(fy));
      const long x0 = static_cast<long>(std::floor(fx));
      const double wy = fy - y0, wx = fx - x0;
      double acc = 0.0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const long yy = y0 + dy, xx = x0 + dx;
          const double wgt = (dy ? wy : 1.0 - wy) * (dx ? wx : 1.0 - wx);
          if (wgt == 0.0) continue;
          const bool inside = yy >= 0 && yy < static_cast<long>(src.h) &&
                              xx >= 0 && xx < static_cast<long>(src.w);
          acc += wgt * (inside ? src.at(static_cast<std::size_t>(yy),
                                        static_cast<std::size_t>(xx))
                               : fill);
        }
      }
      dst.at(y, x) = static_cast<float>(acc);
    }
  }
  return dst;
}

Grid2D<std::uint8_t> rotate_nearest(const Grid2D<std::uint8_t>& src,
                                    double degrees, std::uint8_t fill) {
  Grid2D<std::uint8_t> dst(src.h, src.w);
  const auto inv = make_inverse(degrees, src.h, src.w);
  for (std::size_t y = 0; y < src.h; ++y) {
    for (std::size_t x = 0; x < src.w; ++x) {
      double fy, fx;
      inv(static_cast<double>(y), static_cast<double>(x), &fy, &fx);
      const long yy = static_cast<long>(std::floor(fy + 0.5));
      const long xx = static_cast<long>(std::floor(fx + 0.5));
      const bool inside = yy >= 0 && yy < static_cast<long>(src.h) && xx >= 0 &&
                          xx < static_cast<long>(src.w);
      dst.at(y, x) = inside ? src.at(static_cast<std::size_t>(yy),
                                     static_cast<std::size_t>(xx))
                            : fill;
    }
  }
  return dst;
}

Tensor<float> rotate_planes_bilinear(const Tensor<float>& src, double degrees,
                                     Grid2D<float>* sums) {
  if (src.ndim() != 3) throw std::invalid_argument("rotate_planes: want (C,H,W)");
  const std::size_t c = src.dim(0), h = src.dim(1), w = src.dim(2);
  Tensor<float> dst({c, h, w});
  if (sums) *sums = Grid2D<float>(h, w, 0.0f);
  Grid2D<float> plane(h, w);
  for (std::size_t ci = 0; ci < c; ++ci) {
    std::copy(src.data() + ci * h * w, src.data() + (ci + 1) * h * w,
              plane.v.begin());
    Grid2D<float> rot = rotate_bilinear(plane, degrees, 0.0f);
    std::copy(rot.v.begin(), rot.v.end(), dst.data() + ci * h * w);
    if (sums)
      for (std::size_t i = 0; i < rot.v.size(); ++i) sums->v[i] += rot.v[i];
  }
  return dst;
}

}  // namespace alseg
