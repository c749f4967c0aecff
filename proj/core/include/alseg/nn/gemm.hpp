#pragma once

#include <cstddef>

namespace alseg::nn {

// C = alpha * op(A) * op(B) + beta * C, all matrices row-major.
// op(A) is m x k, op(B) is k x n, C is m x n. Safe to call concurrently
// from multiple threads; each call runs single-threaded.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, T alpha, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T beta, T* c, std::size_t ldc);

}  // namespace alseg::nn
