#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "mlmrt/design.hpp"
#include "mlmrt/distributions.hpp"
#include "mlmrt/trend.hpp"

namespace mlmrt {

enum class Method { Power, Precision };

std::string_view to_string(Method m);
// "power" or "confidence interval".
Method parse_method(std::string_view name);

struct EffectCovariance {
  Eigen::MatrixXd q;      // Mp x Mp, standardized information per participant
  Eigen::MatrixXd q_inv;  // standardized asymptotic covariance of δ̂
  int mp = 0;
  double condition = 0.0;
};

// Q = Σ_t τ_t K_t with K_t(m,m) = π_m(1-π_m) Z_m Z_mᵀ and
// K_t(m,n) = -π_m π_n Z_m Z_nᵀ. Throws SingularQ naming a level when Q is
// not invertible to working precision.
EffectCovariance build_Q(const DesignSpec& design, const EffectTrend& trend);

struct SizingResult {
  int n = 0;
  double value = 0.0;  // power or coverage at n
  TestVariant variant = TestVariant::Chi;
  Method method = Method::Power;
  double lambda = 0.0;  // noncentrality (power) or quadratic form (precision) at n
  int df1 = 0;
  int df2 = 0;
  int evaluations = 0;
};

// Sizing model for one design and one effect (or precision) trend. q is the
// intercept dimension and only affects the N-q-1 variant.
class PowerModel {
 public:
  PowerModel(DesignSpec design, EffectTrend trend, int q);

  const DesignSpec& design() const { return design_; }
  const EffectTrend& trend() const { return trend_; }
  const EffectCovariance& covariance() const { return cov_; }
  const Eigen::VectorXd& delta() const { return delta_; }
  int mp() const { return cov_.mp; }
  int q() const { return q_; }
  // δᵀQδ
  double information() const { return info_; }

  double noncentrality(int n) const { return n * info_; }
  // Throw InsufficientN below the variant's df floor.
  double power(int n, double alpha, TestVariant v) const;
  double coverage(int n, TestVariant v) const;

  // Smallest N the solvers consider: the variant's df floor, and never below
  // Mp + 1.
  int search_floor(TestVariant v) const;

  // Minimal N with power >= target. NoSolution beyond max_n.
  SizingResult sample_size_power(double alpha, double target, TestVariant v,
                                 int max_n = 1000000) const;
  // Minimal N with coverage >= 1 - alpha.
  SizingResult sample_size_precision(double alpha, TestVariant v, int max_n = 1000000) const;

 private:
  template <class F>
  SizingResult search(F value, double target, TestVariant v, int max_n) const;

  DesignSpec design_;
  EffectTrend trend_;
  int q_;
  EffectCovariance cov_;
  Eigen::VectorXd delta_;
  double info_ = 0.0;
};

}  // namespace mlmrt
