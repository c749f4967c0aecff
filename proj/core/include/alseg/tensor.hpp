#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace alseg {

// Dense row-major tensor. NN activations use (N, C, H, W); 2D maps use (H, W).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape) { resize(std::move(shape)); }
  Tensor(std::initializer_list<std::size_t> shape)
      : Tensor(std::vector<std::size_t>(shape)) {}

  void resize(std::vector<std::size_t> shape) {
    shape_ = std::move(shape);
    std::size_t n = 1;
    for (auto d : shape_) n *= d;
    data_.assign(n, T{});
  }

  // Reshape without reallocating; element count must match.
  void reshape(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    if (n != data_.size()) throw std::invalid_argument("tensor reshape: size mismatch");
    shape_ = std::move(shape);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // (n, c, h, w) indexing for 4-d tensors.
  T& at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  // (c, h, w) indexing for 3-d tensors.
  T& at3(std::size_t c, std::size_t h, std::size_t w) {
    return data_[(c * shape_[1] + h) * shape_[2] + w];
  }
  const T& at3(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * shape_[1] + h) * shape_[2] + w];
  }

  T& at2(std::size_t h, std::size_t w) { return data_[h * shape_[1] + w]; }
  const T& at2(std::size_t h, std::size_t w) const { return data_[h * shape_[1] + w]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

// Plain 2D grid for images and masks outside the NN stack.
template <typename T>
struct Grid2D {
  std::size_t h = 0, w = 0;
  std::vector<T> v;

  Grid2D() = default;
  Grid2D(std::size_t h_, std::size_t w_, T init = T{}) : h(h_), w(w_), v(h_ * w_, init) {}

  T& at(std::size_t y, std::size_t x) { return v[y * w + x]; }
  const T& at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
  std::size_t size() const { return v.size(); }
  template <typename U>
  bool same_shape(const Grid2D<U>& o) const { return h == o.h && w == o.w; }
  bool operator==(const Grid2D& o) const { return h == o.h && w == o.w && v == o.v; }
};

// Plain 3D grid (D slices of H x W), axis 0 is the slicing axis.
template <typename T>
struct Grid3D {
  std::size_t d = 0, h = 0, w = 0;
  std::vector<T> v;

  Grid3D() = default;
  Grid3D(std::size_t d_, std::size_t h_, std::size_t w_, T init = T{})
      : d(d_), h(h_), w(w_), v(d_ * h_ * w_, init) {}

  T& at(std::size_t z, std::size_t y, std::size_t x) { return v[(z * h + y) * w + x]; }
  const T& at(std::size_t z, std::size_t y, std::size_t x) const {
    return v[(z * h + y) * w + x];
  }
  std::size_t size() const { return v.size(); }
  template <typename U>
  bool same_shape(const Grid3D<U>& o) const { return d == o.d && h == o.h && w == o.w; }
};

}  // namespace alseg
