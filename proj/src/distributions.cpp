#include "mlmrt/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include "mlmrt/error.hpp"

namespace mlmrt {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 1000000;
// Truncation target for the Poisson mixtures.
constexpr double kMixtureTol = 1e-15;

[[noreturn]] void nonconvergence(const char* what, double a, double b, double x) {
  throw Error(ErrorKind::NonConvergence, std::string(what) + " did not converge (a=" +
                                             std::to_string(a) + ", b=" + std::to_string(b) +
                                             ", x=" + std::to_string(x) + ")");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// P and Q together; the smaller one is computed directly.
std::pair<double, double> gamma_pq(double a, double x) {
  if (x <= 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  const double log_pref = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) {
        const double p = clamp01(sum * std::exp(log_pref));
        return {p, 1.0 - p};
      }
    }
    nonconvergence("incomplete gamma series", a, 0.0, x);
  }
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      const double q = clamp01(std::exp(log_pref) * h);
      return {1.0 - q, q};
    }
  }
  nonconvergence("incomplete gamma continued fraction", a, 0.0, x);
}

double beta_cf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  nonconvergence("incomplete beta continued fraction", a, b, x);
}

// I_x(a,b) and 1 - I_x(a,b); x1 = 1 - x is passed separately to keep
// precision when x is close to 1.
std::pair<double, double> beta_pq(double a, double b, double x, double x1) {
  if (x <= 0.0) return {0.0, 1.0};
  if (x1 <= 0.0) return {1.0, 0.0};
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                        b * std::log(x1);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double i = clamp01(std::exp(log_bt) * beta_cf(a, b, x) / a);
    return {i, 1.0 - i};
  }
  const double j = clamp01(std::exp(log_bt) * beta_cf(b, a, x1) / b);
  return {1.0 - j, j};
}

double log_poisson(double mu, double j) {
  if (mu <= 0.0) return j == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mu + j * std::log(mu) - std::lgamma(j + 1.0);
}

// Sums Σ_j Pois(j; mu)·(cdf_j, sf_j) outward from the Poisson mode. A family
// provides start(j) -> (cdf_j, sf_j, t_j) evaluated directly, and up/down
// ratios that move the recurrence term t_j one index.
template <class Family>
std::pair<double, double> poisson_mixture(double mu, Family& fam) {
  const double j0 = std::floor(mu);
  const double w0 = std::exp(log_poisson(mu, j0));
  auto [cdf0, sf0, t0] = fam.start(j0);
  double cdf = w0 * cdf0, sf = w0 * sf0, total = w0;

  // Upward: cdf_{j+1} = cdf_j - t_j, t_{j+1} = t_j * up(j).
  {
    double w = w0, c = cdf0, s = sf0, t = t0;
    for (int k = 1;; ++k) {
      const double j = j0 + k;
      if (k > kMaxIter) nonconvergence("noncentral series (upward)", mu, j, 0.0);
      c = clamp01(c - t);
      s = clamp01(s + t);
      t *= fam.up(j - 1);
      w *= mu / j;
      cdf += w * c;
      sf += w * s;
      total += w;
      const double r = mu / (j + 1.0);
      if (r < 1.0 && w * r / (1.0 - r) < kMixtureTol) break;
    }
  }
  // Downward: cdf_{j-1} = cdf_j + t_{j-1}, t_{j-1} = t_j * down(j).
  {
    double w = w0, c = cdf0, s = sf0, t = t0;
    for (double j = j0; j > 0.0;) {
      if (j0 - j > kMaxIter) nonconvergence("noncentral series (downward)", mu, j, 0.0);
      t *= fam.down(j);
      c = clamp01(c + t);
      s = clamp01(s - t);
      w *= j / mu;
      j -= 1.0;
      cdf += w * c;
      sf += w * s;
      total += w;
      const double r = j / mu;
      if (r < 1.0 && w * r / (1.0 - r) < kMixtureTol) break;
    }
  }
  // The smaller tail carries full relative precision; derive the other from it.
  cdf /= total;
  sf /= total;
  if (cdf < sf) return {clamp01(cdf), clamp01(1.0 - cdf)};
  return {clamp01(1.0 - sf), clamp01(sf)};
}

struct ChiFamily {
  double a0, y;
  // t_j = y^a e^{-y} / Γ(a+1) with a = a0 + j.
  std::tuple<double, double, double> start(double j) const {
    const double a = a0 + j;
    auto [p, q] = gamma_pq(a, y);
    return {p, q, std::exp(a * std::log(y) - y - std::lgamma(a + 1.0))};
  }
  double up(double j) const { return y / (a0 + j + 1.0); }
  double down(double j) const { return (a0 + j) / y; }
};

struct FFamily {
  double a0, b, y, y1;
  // t_j = Γ(a+b) / (Γ(a+1)Γ(b)) y^a (1-y)^b with a = a0 + j.
  std::tuple<double, double, double> start(double j) const {
    const double a = a0 + j;
    auto [i, ic] = beta_pq(a, b, y, y1);
    const double t = std::exp(std::lgamma(a + b) - std::lgamma(a + 1.0) - std::lgamma(b) +
                              a * std::log(y) + b * std::log(y1));
    return {i, ic, t};
  }
  double up(double j) const {
    const double a = a0 + j;
    return y * (a + b) / (a + 1.0);
  }
  double down(double j) const {
    const double a = a0 + j;
    return a / (y * (a - 1.0 + b));
  }
};

std::pair<double, double> nc_chisq_pair(double x, double df, double lambda) {
  if (x <= 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (lambda <= 0.0) return gamma_pq(df / 2.0, x / 2.0);
  ChiFamily fam{df / 2.0, x / 2.0};
  return poisson_mixture(lambda / 2.0, fam);
}

std::pair<double, double> nc_f_pair(double x, double df1, double df2, double lambda) {
  if (x <= 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  const double den = df1 * x + df2;
  const double y = df1 * x / den, y1 = df2 / den;
  if (lambda <= 0.0) return beta_pq(df1 / 2.0, df2 / 2.0, y, y1);
  FFamily fam{df1 / 2.0, df2 / 2.0, y, y1};
  return poisson_mixture(lambda / 2.0, fam);
}

// Safeguarded Newton on a bracket grown geometrically from `start`.
template <class Cdf, class Sf, class Pdf>
double quantile(double p, double start, Cdf cdf, Sf sf, Pdf pdf) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::NonConvergence, "quantile probability outside [0,1]");
  }
  auto resid = [&](double x) { return p <= 0.5 ? cdf(x) - p : (1.0 - p) - sf(x); };
  double lo = 0.0, hi = std::max(start, 1e-3);
  for (int i = 0; resid(hi) < 0.0; ++i) {
    if (i > 2000) throw Error(ErrorKind::NonConvergence, "quantile bracket did not close");
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double f = resid(x);
    if (f == 0.0) return x;
    if (f < 0.0) lo = x;
    else hi = x;
    if (hi - lo <= 4.0 * kEps * hi) return 0.5 * (lo + hi);
    const double d = pdf(x);
    double nx = d > 0.0 ? x - f / d : lo - 1.0;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 2.0 * kEps * std::abs(x)) return nx;
    x = nx;
  }
  return x;
}

}  // namespace

double gamma_p(double a, double x) { return gamma_pq(a, x).first; }
double gamma_q(double a, double x) { return gamma_pq(a, x).second; }
double beta_inc(double a, double b, double x) { return beta_pq(a, b, x, 1.0 - x).first; }

double chisq_pdf(double x, double df) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return df < 2.0 ? std::numeric_limits<double>::infinity() : (df == 2.0 ? 0.5 : 0.0);
  const double k = df / 2.0;
  return std::exp((k - 1.0) * std::log(x) - x / 2.0 - k * std::log(2.0) - std::lgamma(k));
}
double chisq_cdf(double x, double df) { return gamma_pq(df / 2.0, x / 2.0).first; }
double chisq_sf(double x, double df) { return gamma_pq(df / 2.0, x / 2.0).second; }
double chisq_quantile(double p, double df) {
  return quantile(
      p, df, [df](double x) { return chisq_cdf(x, df); },
      [df](double x) { return chisq_sf(x, df); }, [df](double x) { return chisq_pdf(x, df); });
}

double f_pdf(double x, double df1, double df2) {
  if (x <= 0.0) return 0.0;
  const double lb = std::lgamma(df1 / 2.0) + std::lgamma(df2 / 2.0) - std::lgamma((df1 + df2) / 2.0);
  return std::exp(0.5 * (df1 * std::log(df1 * x) + df2 * std::log(df2) -
                         (df1 + df2) * std::log(df1 * x + df2)) -
                  std::log(x) - lb);
}
double f_cdf(double x, double df1, double df2) { return nc_f_pair(x, df1, df2, 0.0).first; }
double f_sf(double x, double df1, double df2) { return nc_f_pair(x, df1, df2, 0.0).second; }
double f_quantile(double p, double df1, double df2) {
  return quantile(
      p, 1.0, [=](double x) { return f_cdf(x, df1, df2); },
      [=](double x) { return f_sf(x, df1, df2); }, [=](double x) { return f_pdf(x, df1, df2); });
}

double nc_chisq_cdf(double x, double df, double lambda) { return nc_chisq_pair(x, df, lambda).first; }
double nc_chisq_sf(double x, double df, double lambda) { return nc_chisq_pair(x, df, lambda).second; }
double nc_f_cdf(double x, double df1, double df2, double lambda) {
  return nc_f_pair(x, df1, df2, lambda).first;
}
double nc_f_sf(double x, double df1, double df2, double lambda) {
  return nc_f_pair(x, df1, df2, lambda).second;
}

std::string_view to_string(TestVariant v) {
  switch (v) {
    case TestVariant::Chi: return "chi";
    case TestVariant::HotellingNq1: return "hotelling N-q-1";
    case TestVariant::HotellingN1: return "hotelling N-1";
    case TestVariant::HotellingN: return "hotelling N";
  }
  return "chi";
}

TestVariant parse_variant(std::string_view name) {
  if (name == "chi") return TestVariant::Chi;
  if (name == "hotelling N-q-1") return TestVariant::HotellingNq1;
  if (name == "hotelling N-1") return TestVariant::HotellingN1;
  if (name == "hotelling N") return TestVariant::HotellingN;
  throw Error(ErrorKind::InvalidConfig,
              "unknown test \"" + std::string(name) +
                  "\" (expected chi, hotelling N-q-1, hotelling N-1, hotelling N)");
}

int min_sample_size(TestVariant v, int mp, int q) {
  switch (v) {
    case TestVariant::Chi: return 1;
    case TestVariant::HotellingNq1: return q + mp + 1;
    case TestVariant::HotellingN1: return mp + 1;
    case TestVariant::HotellingN: return mp;
  }
  return 1;
}

Reference reference(TestVariant v, int mp, int n, int q) {
  Reference r;
  r.variant = v;
  r.df1 = mp;
  if (v == TestVariant::Chi) return r;
  double denom = 0.0;
  switch (v) {
    case TestVariant::HotellingNq1:
      r.df2 = n - q - mp;
      denom = static_cast<double>(mp) * (n - q - 1);
      break;
    case TestVariant::HotellingN1:
      r.df2 = n - mp;
      denom = static_cast<double>(mp) * (n - 1);
      break;
    default:
      r.df2 = n - mp + 1;
      denom = static_cast<double>(mp) * n;
      break;
  }
  if (r.df2 < 1) {
    throw Error(ErrorKind::InsufficientN,
                "test " + std::string(to_string(v)) + " needs N >= " +
                    std::to_string(min_sample_size(v, mp, q)) + " for Mp=" + std::to_string(mp) +
                    ", q=" + std::to_string(q) + " (got N=" + std::to_string(n) + ")");
  }
  r.scale = r.df2 / denom;
  return r;
}

double Reference::critical(double alpha) const {
  if (is_chi()) return chisq_quantile(1.0 - alpha, df1);
  return f_quantile(1.0 - alpha, df1, df2) / scale;
}

double Reference::cdf(double t2) const {
  return is_chi() ? chisq_cdf(t2, df1) : f_cdf(scale * t2, df1, df2);
}

double Reference::sf(double t2) const {
  return is_chi() ? chisq_sf(t2, df1) : f_sf(scale * t2, df1, df2);
}

double Reference::power(double alpha, double lambda) const {
  if (is_chi()) return nc_chisq_sf(chisq_quantile(1.0 - alpha, df1), df1, lambda);
  return nc_f_sf(f_quantile(1.0 - alpha, df1, df2), df1, df2, lambda);
}

HotellingF hotelling_to_f(double t2, int mp, int n, int q, TestVariant v) {
  const Reference r = reference(v, mp, n, q);
  return {r.scale * t2, r.df1, r.df2, r.scale};
}

}  // namespace mlmrt
