#pragma once

#include <string>
#include <string_view>

namespace mlmrt {

// Regularized incomplete gamma P(a, x), Q(a, x) and beta I_x(a, b).
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double beta_inc(double a, double b, double x);

double chisq_pdf(double x, double df);
double chisq_cdf(double x, double df);
double chisq_sf(double x, double df);
double chisq_quantile(double p, double df);

double f_pdf(double x, double df1, double df2);
double f_cdf(double x, double df1, double df2);
double f_sf(double x, double df1, double df2);
double f_quantile(double p, double df1, double df2);

// Noncentral distributions as Poisson mixtures of their central
// counterparts. Throw NonConvergence if the series cannot be truncated to
// tolerance within the iteration cap.
double nc_chisq_cdf(double x, double df, double lambda);
double nc_chisq_sf(double x, double df, double lambda);
double nc_f_cdf(double x, double df1, double df2, double lambda);
double nc_f_sf(double x, double df1, double df2, double lambda);

enum class TestVariant { Chi, HotellingNq1, HotellingN1, HotellingN };

std::string_view to_string(TestVariant v);
// "chi", "hotelling N-q-1", "hotelling N-1", "hotelling N".
TestVariant parse_variant(std::string_view name);

// Smallest N for which the variant's reference distribution exists.
int min_sample_size(TestVariant v, int mp, int q);

// Reference distribution of N·βᵀΣ⁻¹β for a variant. For the Hotelling
// variants scale·T² ~ F(df1, df2); for χ² scale = 1 and df2 = 0.
struct Reference {
  TestVariant variant = TestVariant::Chi;
  int df1 = 1;
  int df2 = 0;
  double scale = 1.0;

  bool is_chi() const { return variant == TestVariant::Chi; }
  // Critical value on the T² scale.
  double critical(double alpha) const;
  double cdf(double t2) const;
  double sf(double t2) const;
  // Probability of exceeding the critical value when the noncentrality is λ.
  double power(double alpha, double lambda) const;
};

// Throws InsufficientN when df2 < 1.
Reference reference(TestVariant v, int mp, int n, int q);

struct HotellingF {
  double f;
  int df1;
  int df2;
  double scale;
};

HotellingF hotelling_to_f(double t2, int mp, int n, int q, TestVariant v);

}  // namespace mlmrt
