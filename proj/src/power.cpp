#include "mlmrt/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mlmrt/error.hpp"
#include "mlmrt/kernels.hpp"

namespace mlmrt {

std::string_view to_string(Method m) {
  return m == Method::Power ? "power" : "confidence interval";
}

Method parse_method(std::string_view name) {
  if (name == "power") return Method::Power;
  if (name == "confidence interval" || name == "precision") return Method::Precision;
  throw Error(ErrorKind::InvalidConfig, "unknown method \"" + std::string(name) +
                                            "\" (expected power or confidence interval)");
}

EffectCovariance build_Q(const DesignSpec& design, const EffectTrend& trend) {
  require_valid(design);
  check_trend(trend, design);
  const int m_total = design.levels();
  const int p = trend.p();
  const int mp = m_total * p;
  const int n_tp = design.time_points();
  const int T = design.occasions_per_day;

  // Per time point: one row per available level, e_m = Z_m placed in block m
  // with weight τπ_m, plus u = Σ π_m e_m with weight -τ.
  std::vector<double> rows;
  std::vector<double> weights;
  rows.reserve(static_cast<std::size_t>(n_tp) * (m_total + 1) * mp);
  std::vector<double> z(p);
  std::vector<double> u(mp);
  for (int tp = 0; tp < n_tp; ++tp) {
    const double tau = design.availability[tp];
    if (tau == 0.0) continue;
    std::fill(u.begin(), u.end(), 0.0);
    bool any = false;
    for (int m = 1; m <= m_total; ++m) {
      const double pi = design.pi(tp, m);
      if (pi == 0.0) continue;
      any = true;
      z_basis(trend, m, design.day_of(tp), design.occasion_of(tp), T, z);
      const std::size_t at = rows.size();
      rows.resize(at + mp, 0.0);
      for (int j = 0; j < p; ++j) {
        rows[at + (m - 1) * p + j] = z[j];
        u[(m - 1) * p + j] = pi * z[j];
      }
      weights.push_back(tau * pi);
    }
    if (!any) continue;
    rows.insert(rows.end(), u.begin(), u.end());
    weights.push_back(-tau);
  }

  EffectCovariance out;
  out.mp = mp;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(mp, mp);
  kernels::accumulate_gram(rows.data(), weights.size(), mp, weights.data(), g.data());
  out.q = 0.5 * (g + g.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.q, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || out.condition > 1e12) {
    // Name the first level whose own block is not identifiable.
    int bad = 0;
    for (int m = 1; m <= m_total && !bad; ++m) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> be(
          out.q.block((m - 1) * p, (m - 1) * p, p, p), Eigen::EigenvaluesOnly);
      const double bl = be.eigenvalues().minCoeff(), bh = be.eigenvalues().maxCoeff();
      if (!(bl > 0.0) || bh / bl > 1e12) bad = m;
    }
    std::string msg = "Q is singular (condition " + std::to_string(out.condition) + ")";
    if (bad)
      msg += ": level " + std::to_string(bad) +
             " lacks probability mass on enough distinct basis values";
    throw Error(ErrorKind::SingularQ, msg);
  }
  out.q_inv = out.q.ldlt().solve(Eigen::MatrixXd::Identity(mp, mp));
  return out;
}

PowerModel::PowerModel(DesignSpec design, EffectTrend trend, int q)
    : design_(std::move(design)), trend_(std::move(trend)), q_(q) {
  if (q_ < 1) throw Error(ErrorKind::InvalidConfig, "intercept dimension q must be >= 1");
  cov_ = build_Q(design_, trend_);
  delta_ = solve_coefficients(trend_, design_);
  info_ = std::max(0.0, delta_.dot(cov_.q * delta_));
}

double PowerModel::power(int n, double alpha, TestVariant v) const {
  return reference(v, mp(), n, q_).power(alpha, noncentrality(n));
}

double PowerModel::coverage(int n, TestVariant v) const {
  return reference(v, mp(), n, q_).cdf(n * info_);
}

int PowerModel::search_floor(TestVariant v) const {
  return std::max(min_sample_size(v, mp(), q_), mp() + 1);
}

template <class F>
SizingResult PowerModel::search(F value, double target, TestVariant v, int max_n) const {
  SizingResult r;
  r.variant = v;
  const int floor = search_floor(v);
  if (floor > max_n)
    throw Error(ErrorKind::NoSolution, "df floor " + std::to_string(floor) +
                                           " exceeds the sample size cap " +
                                           std::to_string(max_n));
  int evals = 0;
  auto at = [&](int n) {
    ++evals;
    return value(n);
  };

  // Exact scan near the floor, then a doubling bracket with bisection.
  int found = 0;
  double found_value = 0.0;
  constexpr int kScan = 64;
  const int scan_end = std::min(max_n, floor + kScan - 1);
  for (int n = floor; n <= scan_end; ++n) {
    const double v_n = at(n);
    if (v_n >= target) {
      found = n;
      found_value = v_n;
      break;
    }
  }
  if (!found) {
    long lo = scan_end, hi = scan_end;
    double v_hi = 0.0;
    for (;;) {
      if (hi >= max_n)
        throw Error(ErrorKind::NoSolution,
                    "target " + std::to_string(target) + " not reached for N <= " +
                        std::to_string(max_n) + " (effect too small)");
      lo = hi;
      hi = std::min<long>(2 * hi, max_n);
      v_hi = at(static_cast<int>(hi));
      if (v_hi >= target) break;
    }
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      const double v_mid = at(static_cast<int>(mid));
      if (v_mid >= target) {
        hi = mid;
        v_hi = v_mid;
      } else {
        lo = mid;
      }
    }
    found = static_cast<int>(hi);
    found_value = v_hi;
    while (found - 1 > scan_end) {
      const double v_prev = at(found - 1);
      if (v_prev < target) break;
      --found;
      found_value = v_prev;
    }
  }

  const Reference ref = reference(v, mp(), found, q_);
  r.n = found;
  r.value = found_value;
  r.df1 = ref.df1;
  r.df2 = ref.df2;
  r.evaluations = evals;
  return r;
}

SizingResult PowerModel::sample_size_power(double alpha, double target, TestVariant v,
                                           int max_n) const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::InvalidConfig, "significance level must lie in (0,1)");
  if (!(target > alpha && target < 1.0))
    throw Error(ErrorKind::InvalidConfig, "target power must lie in (sigLev, 1)");
  if (!(info_ > 0.0))
    throw Error(ErrorKind::NoSolution, "zero effect: no sample size reaches the target power");
  SizingResult r = search([&](int n) { return power(n, alpha, v); }, target, v, max_n);
  r.method = Method::Power;
  r.lambda = noncentrality(r.n);
  return r;
}

SizingResult PowerModel::sample_size_precision(double alpha, TestVariant v, int max_n) const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::InvalidConfig, "significance level must lie in (0,1)");
  if (!(info_ > 0.0))
    throw Error(ErrorKind::NoSolution, "zero precision target: coverage is always 0");
  SizingResult r = search([&](int n) { return coverage(n, v); }, 1.0 - alpha, v, max_n);
  r.method = Method::Precision;
  r.lambda = r.n * info_;
  return r;
}

}  // namespace mlmrt
