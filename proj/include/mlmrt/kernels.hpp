#pragma once

#include <cstddef>
#include <string_view>

// Dense accumulation kernels behind Q assembly and the estimator's normal
// equations. Matrices are row-major. Each kernel has a scalar reference
// version; an AVX2+FMA version is selected at runtime when the CPU has it
// and MLMRT_FORCE_SCALAR is unset.
namespace mlmrt::kernels {

// gram (k x k) += Σ_r w[r] · x_r x_rᵀ over the n rows of `rows` (n x k).
// A null `w` means unit weights.
void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram);
// out (k) += Σ_r w[r] · y[r] · x_r
void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out);
double dot(const double* a, const double* b, std::size_t n);

// "avx2" or "scalar".
std::string_view active_isa();
bool avx2_available();

namespace scalar {
void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram);
void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

// Only callable when avx2_available().
namespace avx2 {
void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram);
void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2

}  // namespace mlmrt::kernels
