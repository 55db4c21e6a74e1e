#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

// Dense row-major kernels used by the forward/backward passes.
//
// Every kernel exists twice: the default (OpenMP) variant in bcs::kernel and a
// serial twin in bcs::kernel::ref. Both call the same per-row body, so each
// output element is accumulated by exactly one thread in a fixed order and the
// two variants produce bit-identical results at any thread count.

namespace bcs::kernel {

struct OpCount {
  std::uint64_t madds = 0;
};

namespace detail {

inline double dot(const double* __restrict__ a, const double* __restrict__ b,
                  std::size_t len) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t t = 0;
  for (; t + 4 <= len; t += 4) {
    s0 += a[t] * b[t];
    s1 += a[t + 1] * b[t + 1];
    s2 += a[t + 2] * b[t + 2];
    s3 += a[t + 3] * b[t + 3];
  }
  for (; t < len; ++t) s0 += a[t] * b[t];
  return ((s0 + s1) + s2) + s3;
}

// C(i,:) = A(i,:) * B for A (r x k), B (k x c)
inline void gemm_nn_row(std::size_t i, const double* A, const double* B,
                        double* C, std::size_t k, std::size_t c) {
  const double* a = A + i * k;
  double* out = C + i * c;
  std::fill(out, out + c, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const double av = a[t];
    const double* __restrict__ brow = B + t * c;
    for (std::size_t j = 0; j < c; ++j) out[j] += av * brow[j];
  }
}

// C(i,:) = A(i,:) * B^T for A (r x k), B (c x k)
inline void gemm_nt_row(std::size_t i, const double* A, const double* B,
                        double* C, std::size_t k, std::size_t c) {
  const double* a = A + i * k;
  double* out = C + i * c;
  for (std::size_t j = 0; j < c; ++j) out[j] = dot(a, B + j * k, k);
}

// C(i,:) = sum_t A(t,i) * B(t,:) for A (k x r), B (k x c)
inline void gemm_tn_row(std::size_t i, const double* A, const double* B,
                        double* C, std::size_t r, std::size_t k,
                        std::size_t c) {
  double* out = C + i * c;
  std::fill(out, out + c, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const double av = A[t * r + i];
    const double* __restrict__ brow = B + t * c;
    for (std::size_t j = 0; j < c; ++j) out[j] += av * brow[j];
  }
}

inline void matvec_row(std::size_t i, const double* A, const double* x,
                       const double* b, double* y, std::size_t c) {
  double s = dot(A + i * c, x, c);
  y[i] = b ? s + b[i] : s;
}

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

namespace ref {

// C (r x c) = A (r x k) * B (k x c), all row-major
inline void gemm_nn(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) detail::gemm_nn_row(i, A, B, C, k, c);
}

// C (r x c) = A (r x k) * B^T, B stored (c x k)
inline void gemm_nt(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) detail::gemm_nt_row(i, A, B, C, k, c);
}

// C (r x c) = A^T * B, A stored (k x r), B (k x c)
inline void gemm_tn(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) detail::gemm_tn_row(i, A, B, C, r, k, c);
}

// y (r) = A (r x c) * x (c) + b, b may be null
inline void matvec(const double* A, const double* x, const double* b,
                   double* y, std::size_t r, std::size_t c,
                   OpCount* ops = nullptr) {
  for (std::size_t i = 0; i < r; ++i) detail::matvec_row(i, A, x, b, y, c);
  if (ops) ops->madds += static_cast<std::uint64_t>(r) * c;
}

// s (r) = row sums of A (r x c)
inline void row_sums(const double* A, double* s, std::size_t r,
                     std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* a = A + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += a[j];
    s[i] = acc;
  }
}

// C(i,j) += b[i]
inline void add_col_bias(double* C, const double* b, std::size_t r,
                         std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    double* out = C + i * c;
    const double bi = b[i];
    for (std::size_t j = 0; j < c; ++j) out[j] += bi;
  }
}

}  // namespace ref

inline constexpr std::size_t parallel_grain = 1 << 15;

inline void gemm_nn(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  const bool par = r * k * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i)
    detail::gemm_nn_row(static_cast<std::size_t>(i), A, B, C, k, c);
}

inline void gemm_nt(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  const bool par = r * k * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i)
    detail::gemm_nt_row(static_cast<std::size_t>(i), A, B, C, k, c);
}

inline void gemm_tn(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t c) {
  const bool par = r * k * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i)
    detail::gemm_tn_row(static_cast<std::size_t>(i), A, B, C, r, k, c);
}

inline void matvec(const double* A, const double* x, const double* b,
                   double* y, std::size_t r, std::size_t c,
                   OpCount* ops = nullptr) {
  const bool par = r * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i)
    detail::matvec_row(static_cast<std::size_t>(i), A, x, b, y, c);
  if (ops) ops->madds += static_cast<std::uint64_t>(r) * c;
}

inline void row_sums(const double* A, double* s, std::size_t r,
                     std::size_t c) {
  const bool par = r * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i) {
    double acc = 0.0;
    const double* a = A + static_cast<std::size_t>(i) * c;
    for (std::size_t j = 0; j < c; ++j) acc += a[j];
    s[i] = acc;
  }
}

inline void add_col_bias(double* C, const double* b, std::size_t r,
                         std::size_t c) {
  const bool par = r * c >= parallel_grain;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r); ++i) {
    double* out = C + static_cast<std::size_t>(i) * c;
    const double bi = b[i];
    for (std::size_t j = 0; j < c; ++j) out[j] += bi;
  }
}

}  // namespace bcs::kernel
