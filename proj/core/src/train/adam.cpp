#include "alseg/train/adam.hpp"

#include <cmath>

namespace alseg::train {

template <typename T>
Adam<T>::Adam(std::vector<nn::Param<T>*> params, double weight_decay,
              double beta1, double beta2, double eps)
    : params_(std::move(params)), wd_(weight_decay), b1_(beta1), b2_(beta2),
      eps_(eps) {
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i].assign(params_[i]->value.size(), 0.0);
    v_[i].assign(params_[i]->value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t q = 0; q < p.value.size(); ++q) {
      const double g =
          static_cast<double>(p.grad[q]) + wd_ * static_cast<double>(p.value[q]);
      m[q] = b1_ * m[q] + (1.0 - b1_) * g;
      v[q] = b2_ * v[q] + (1.0 - b2_) * g * g;
      const double mh = m[q] / bc1;
      const double vh = v[q] / bc2;
      p.value[q] =
          static_cast<T>(static_cast<double>(p.value[q]) -
                         lr * mh / (std::sqrt(vh) + eps_));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace alseg::train
