#pragma once

#include <cmath>
#include <functional>

#include "alseg/tensor.hpp"

namespace testutil {

// Relative error with an absolute floor so near-zero pairs compare sanely.
inline double rel_err(double a, double b, double floor = 1e-12) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Central finite difference of a scalar functional with respect to one
// entry of a tensor.
template <typename T>
double fd_grad(alseg::Tensor<T>& x, std::size_t idx,
               const std::function<double()>& eval, double h = 1e-6) {
  const T keep = x[idx];
  x[idx] = static_cast<T>(keep + h);
  const double up = eval();
  x[idx] = static_cast<T>(keep - h);
  const double dn = eval();
  x[idx] = keep;
  return (up - dn) / (2.0 * h);
}

}  // namespace testutil
