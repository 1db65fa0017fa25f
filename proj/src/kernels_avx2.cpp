#include <immintrin.h>

#include "mlmrt/kernels.hpp"

namespace mlmrt::kernels::avx2 {

namespace {

// y[0..k) += s * x[0..k)
inline void axpy(double s, const double* x, double* y, std::size_t k) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t j = 0;
  for (; j + 4 <= k; j += 4) {
    const __m256d vy = _mm256_loadu_pd(y + j);
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + j), vy));
  }
  for (; j < k; ++j) y[j] += s * x[j];
}

}  // namespace

void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = rows + r * k;
    const double wr = w ? w[r] : 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = wr * x[i];
      if (s == 0.0) continue;
      axpy(s, x, gram + i * k, k);
    }
  }
}

void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out) {
  for (std::size_t r = 0; r < n; ++r) axpy((w ? w[r] : 1.0) * y[r], rows + r * k, out, k);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mlmrt::kernels::avx2
