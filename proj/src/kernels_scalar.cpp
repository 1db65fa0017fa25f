#include "mlmrt/kernels.hpp"

namespace mlmrt::kernels::scalar {

void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = rows + r * k;
    const double wr = w ? w[r] : 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = wr * x[i];
      if (s == 0.0) continue;
      double* g = gram + i * k;
      for (std::size_t j = 0; j < k; ++j) g[j] += s * x[j];
    }
  }
}

void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = rows + r * k;
    const double s = (w ? w[r] : 1.0) * y[r];
    for (std::size_t j = 0; j < k; ++j) out[j] += s * x[j];
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mlmrt::kernels::scalar
