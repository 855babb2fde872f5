#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace bwpred {

/// C (m x n) += A (m x k) * B (k x n), all row-major. The 4-row unrolled
/// ikj order keeps the inner loop contiguous and vectorizable; each C row is
/// owned by exactly one thread, so results do not depend on thread count.
inline void gemm_nn(const double* A, const double* B, double* C, int m, int n, int k) {
  int m4 = m - (m % 4);
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < m4 / 4; ++i0) {
    int i = i0 * 4;
    double* c0 = C + static_cast<std::size_t>(i) * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    const double* a = A + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      double a0 = a[p], a1 = a[p + k], a2 = a[p + 2 * k], a3 = a[p + 3 * k];
      const double* b = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) {
        double bv = b[j];
        c0[j] += a0 * bv;
        c1[j] += a1 * bv;
        c2[j] += a2 * bv;
        c3[j] += a3 * bv;
      }
    }
  }
  for (int i = m4; i < m; ++i) {
    double* c = C + static_cast<std::size_t>(i) * n;
    const double* a = A + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      double av = a[p];
      const double* b = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

/// C (k x n) += A^T * B with A (m x k), B (m x n), all row-major.
/// Used for weight gradients: each thread owns a band of C rows.
inline void gemm_tn(const double* A, const double* B, double* C, int m, int n, int k) {
#pragma omp parallel for schedule(static)
  for (int p = 0; p < k; ++p) {
    double* c = C + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      double av = A[static_cast<std::size_t>(i) * k + p];
      if (av == 0.0) continue;
      const double* b = B + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

inline void add_bias_rows(double* X, const double* b, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    double* x = X + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) x[j] += b[j];
  }
}

inline void col_sums(const double* X, double* out, int rows, int cols) {
  std::fill(out, out + cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const double* x = X + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) out[j] += x[j];
  }
}

inline std::vector<double> transpose(const std::vector<double>& a, int rows, int cols) {
  std::vector<double> t(a.size());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      t[static_cast<std::size_t>(j) * rows + i] = a[static_cast<std::size_t>(i) * cols + j];
  return t;
}

}  // namespace bwpred
