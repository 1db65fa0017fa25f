#include <cstdlib>

#include "mlmrt/kernels.hpp"

namespace mlmrt::kernels {

namespace {

struct Table {
  decltype(&scalar::accumulate_gram) gram;
  decltype(&scalar::accumulate_xty) xty;
  decltype(&scalar::dot) dot;
  std::string_view isa;
};

bool cpu_has_avx2() {
#if defined(MLMRT_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& table() {
  static const Table t = [] {
    const char* force = std::getenv("MLMRT_FORCE_SCALAR");
    const bool forced = force && *force && std::string_view(force) != "0";
#if defined(MLMRT_HAVE_AVX2_TU)
    if (!forced && cpu_has_avx2())
      return Table{&avx2::accumulate_gram, &avx2::accumulate_xty, &avx2::dot, "avx2"};
#endif
    (void)forced;
    return Table{&scalar::accumulate_gram, &scalar::accumulate_xty, &scalar::dot, "scalar"};
  }();
  return t;
}

}  // namespace

void accumulate_gram(const double* rows, std::size_t n, std::size_t k, const double* w,
                     double* gram) {
  table().gram(rows, n, k, w, gram);
}

void accumulate_xty(const double* rows, std::size_t n, std::size_t k, const double* w,
                    const double* y, double* out) {
  table().xty(rows, n, k, w, y, out);
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }

std::string_view active_isa() { return table().isa; }

bool avx2_available() { return cpu_has_avx2(); }

}  // namespace mlmrt::kernels
