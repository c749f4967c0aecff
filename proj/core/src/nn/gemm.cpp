#include "alseg/nn/gemm.hpp"

#include <Eigen/Dense>

namespace alseg::nn {

namespace {

template <typename T>
using RowMat =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<const RowMat<T>, Eigen::Unaligned,
                          Eigen::OuterStride<Eigen::Dynamic>>;
template <typename T>
using MapMatMut =
    Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<Eigen::Dynamic>>;

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, T alpha, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T beta, T* c, std::size_t ldc) {
  using Idx = Eigen::Index;
  MapMat<T> A(a, trans_a ? Idx(k) : Idx(m), trans_a ? Idx(m) : Idx(k),
              Eigen::OuterStride<>(Idx(lda)));
  MapMat<T> B(b, trans_b ? Idx(n) : Idx(k), trans_b ? Idx(k) : Idx(n),
              Eigen::OuterStride<>(Idx(ldb)));
  MapMatMut<T> C(c, Idx(m), Idx(n), Eigen::OuterStride<>(Idx(ldc)));

  auto apply = [&](const auto& prod) {
    if (beta == T(0)) {
      if (alpha == T(1))
        C.noalias() = prod;
      else
        C.noalias() = alpha * prod;
    } else {
      if (beta != T(1)) C *= beta;
      if (alpha == T(1))
        C.noalias() += prod;
      else
        C.noalias() += alpha * prod;
    }
  };

  if (!trans_a && !trans_b)
    apply(A * B);
  else if (trans_a && !trans_b)
    apply(A.transpose() * B);
  else if (!trans_a && trans_b)
    apply(A * B.transpose());
  else
    apply(A.transpose() * B.transpose());
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t,
                          float, const float*, std::size_t, const float*,
                          std::size_t, float, float*, std::size_t);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t,
                           double, const double*, std::size_t, const double*,
                           std::size_t, double, double*, std::size_t);

}  // namespace alseg::nn
