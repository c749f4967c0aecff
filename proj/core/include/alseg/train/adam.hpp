#pragma once

#include <vector>

#include "alseg/nn/layers.hpp"

namespace alseg::train {

// Adam with L2 regularization folded into the gradient. Moment buffers are
// kept in double regardless of the parameter type.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<nn::Param<T>*> params, double weight_decay = 0.0,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(double lr);
  long steps_taken() const { return t_; }

 private:
  std::vector<nn::Param<T>*> params_;
  std::vector<std::vector<double>> m_, v_;
  double wd_, b1_, b2_, eps_;
  long t_ = 0;
};

}  // namespace alseg::train
