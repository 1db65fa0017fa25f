#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/non_central_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mlmrt/distributions.hpp"
#include "mlmrt/error.hpp"
#include "oracles.hpp"

using namespace mlmrt;
namespace bm = boost::math;

TEST_CASE("central distributions agree with Boost") {
  for (double k : {1.0, 2.0, 3.0, 8.0, 24.0, 120.0})
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0, 150.0}) {
      const bm::chi_squared_distribution<double> ref(k);
      CHECK(std::abs(chisq_cdf(x, k) - bm::cdf(ref, x)) < 1e-13);
      CHECK(std::abs(chisq_sf(x, k) - bm::cdf(bm::complement(ref, x))) < 1e-13);
      CHECK(std::abs(chisq_pdf(x, k) - bm::pdf(ref, x)) < 1e-12);
    }
  for (double d1 : {1.0, 3.0, 8.0})
    for (double d2 : {1.0, 5.0, 30.0, 300.0})
      for (double x : {0.05, 0.5, 1.0, 2.5, 9.0}) {
        const bm::fisher_f_distribution<double> ref(d1, d2);
        CHECK(std::abs(f_cdf(x, d1, d2) - bm::cdf(ref, x)) < 1e-13);
        CHECK(std::abs(f_sf(x, d1, d2) - bm::cdf(bm::complement(ref, x))) < 1e-13);
        CHECK(std::abs(f_pdf(x, d1, d2) - bm::pdf(ref, x)) < 1e-11);
      }
}

TEST_CASE("noncentral distributions agree with Boost") {
  for (double k : {2.0, 6.0, 8.0, 16.0})
    for (double lam : {0.5, 3.0, 20.0, 150.0, 900.0})
      for (double x : {0.5, 5.0, 20.0, 80.0, 400.0, 1200.0}) {
        const bm::non_central_chi_squared_distribution<double> ref(k, lam);
        CHECK(std::abs(nc_chisq_cdf(x, k, lam) - bm::cdf(ref, x)) < 1e-10);
        CHECK(std::abs(nc_chisq_sf(x, k, lam) - bm::cdf(bm::complement(ref, x))) < 1e-10);
      }
  for (double d1 : {3.0, 8.0})
    for (double d2 : {2.0, 10.0, 100.0})
      for (double lam : {0.5, 5.0, 40.0, 300.0})
        for (double x : {0.2, 1.0, 3.0, 10.0, 60.0}) {
          const bm::non_central_f_distribution<double> ref(d1, d2, lam);
          CHECK(std::abs(nc_f_cdf(x, d1, d2, lam) - bm::cdf(ref, x)) < 1e-9);
          CHECK(std::abs(nc_f_sf(x, d1, d2, lam) - bm::cdf(bm::complement(ref, x))) < 1e-9);
        }
}

TEST_CASE("CDFs match the quadrature oracle on a 200-point grid") {
  double worst = 0;
  int points = 0;
  auto track = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b));
    ++points;
  };
  for (double k : {3.0, 8.0})
    for (double x : {0.3, 2.0, 6.0, 12.0, 25.0})
      for (double lam : {0.0, 1.0, 4.0, 12.0, 30.0}) {
        if (lam == 0.0) track(chisq_cdf(x, k), oracle::chisq_cdf(x, k));
        else track(nc_chisq_cdf(x, k, lam), oracle::nc_chisq_cdf(x, k, lam));
      }
  for (double d1 : {3.0, 8.0})
    for (double d2 : {6.0, 40.0})
      for (double x : {0.4, 1.0, 2.0, 4.0, 8.0})
        for (double lam : {0.0, 2.0, 6.0, 15.0, 30.0}) {
          if (lam == 0.0) track(f_cdf(x, d1, d2), oracle::f_cdf(x, d1, d2));
          else track(nc_f_cdf(x, d1, d2, lam), oracle::nc_f_cdf(x, d1, d2, lam));
        }
  for (double k : {4.0, 12.0})
    for (double x : {1.0, 5.0, 10.0, 20.0, 45.0})
      for (double lam : {0.0, 8.0, 20.0, 40.0, 60.0}) {
        if (lam == 0.0) track(chisq_cdf(x, k), oracle::chisq_cdf(x, k));
        else track(nc_chisq_cdf(x, k, lam), oracle::nc_chisq_cdf(x, k, lam));
      }
  CHECK(points == 200);
  CHECK(worst <= 1e-8);
  MESSAGE("max abs CDF error vs quadrature: " << worst);
}

TEST_CASE("spot values cross-checked by simulation") {
  const double v = nc_chisq_cdf(10.0, 6, 3.0);
  CHECK(std::abs(v - oracle::nc_chisq_cdf(10.0, 6, 3.0)) < 1e-9);
  const double w = nc_f_cdf(2.0, 6, 20, 5.0);
  CHECK(std::abs(w - oracle::nc_f_cdf(2.0, 6, 20, 5.0)) < 1e-9);

  std::mt19937_64 gen(42);
  std::normal_distribution<double> z;
  std::chi_squared_distribution<double> denom(20);
  const int n = 1000000;
  int hits_chi = 0, hits_f = 0;
  const double shift = std::sqrt(3.0), shift_f = std::sqrt(5.0);
  for (int i = 0; i < n; ++i) {
    double a = 0, b = 0;
    for (int j = 0; j < 6; ++j) {
      const double e1 = z(gen), e2 = z(gen);
      a += j == 0 ? (e1 + shift) * (e1 + shift) : e1 * e1;
      b += j == 0 ? (e2 + shift_f) * (e2 + shift_f) : e2 * e2;
    }
    hits_chi += a <= 10.0;
    hits_f += (b / 6) / (denom(gen) / 20) <= 2.0;
  }
  CHECK(std::abs(static_cast<double>(hits_chi) / n - v) < 3 * std::sqrt(v * (1 - v) / n));
  CHECK(std::abs(static_cast<double>(hits_f) / n - w) < 3 * std::sqrt(w * (1 - w) / n));
}

TEST_CASE("reductions at zero noncentrality") {
  for (double x : {0.5, 3.0, 11.0}) {
    CHECK(std::abs(nc_chisq_cdf(x, 5, 0) - chisq_cdf(x, 5)) < 1e-12);
    CHECK(std::abs(nc_f_cdf(x / 4, 5, 12, 0) - f_cdf(x / 4, 5, 12)) < 1e-12);
  }
  const double mid = nc_chisq_cdf(9.0, 6, 3.0);
  CHECK((mid > 0.4 && mid < 0.6));
}

TEST_CASE("CDFs are monotone with correct limits and stochastic ordering") {
  for (double lam : {0.0, 2.0, 25.0}) {
    double prev_c = 0, prev_f = 0;
    for (int i = 0; i <= 300; ++i) {
      const double x = 0.25 * i;
      const double c = nc_chisq_cdf(x, 4, lam), f = nc_f_cdf(x, 4, 15, lam);
      CHECK(c >= prev_c - 1e-15);
      CHECK(f >= prev_f - 1e-15);
      prev_c = c;
      prev_f = f;
    }
    CHECK(nc_chisq_cdf(0, 4, lam) == 0.0);
    CHECK(nc_f_cdf(0, 4, 15, lam) == 0.0);
    CHECK(nc_chisq_cdf(1e6, 4, lam) == doctest::Approx(1.0));
    CHECK(nc_f_cdf(1e8, 4, 15, lam) == doctest::Approx(1.0));
  }
  for (double x : {1.0, 4.0, 12.0}) {
    double prev_c = 2, prev_f = 2;
    for (double lam = 0; lam < 60; lam += 1.5) {
      const double c = nc_chisq_cdf(x, 6, lam), f = nc_f_cdf(x / 3, 6, 20, lam);
      CHECK(c <= prev_c + 1e-15);
      CHECK(f <= prev_f + 1e-15);
      prev_c = c;
      prev_f = f;
    }
  }
}

TEST_CASE("quantiles invert the CDFs") {
  for (double p : {1e-6, 0.01, 0.05, 0.5, 0.95, 0.99, 1 - 1e-8})
    for (double k : {1.0, 3.0, 8.0, 40.0}) {
      const double q = chisq_quantile(p, k);
      CHECK(std::abs(chisq_cdf(q, k) - p) < 1e-9);
      for (double d2 : {1.0, 4.0, 60.0}) {
        const double fq = f_quantile(p, k, d2);
        CHECK(std::abs(f_cdf(fq, k, d2) - p) < 1e-9);
        CHECK(std::abs(nc_f_cdf(fq, k, d2, 0) - p) < 1e-9);
      }
    }
  const double q = f_quantile(0.95, 3, 10);
  CHECK(std::abs(nc_f_cdf(q, 3, 10, 0) - 0.95) < 1e-9);
  CHECK(std::abs(q - bm::quantile(bm::fisher_f_distribution<double>(3, 10), 0.95)) < 1e-8);
  CHECK(std::isinf(chisq_quantile(1.0, 3)));
  CHECK_THROWS_AS(chisq_quantile(1.5, 3), Error);
}

TEST_CASE("Hotelling to F scaling") {
  const HotellingF a = hotelling_to_f(10, 6, 20, 1, TestVariant::HotellingNq1);
  CHECK(a.df1 == 6);
  CHECK(a.df2 == 13);
  CHECK(a.scale == doctest::Approx(13.0 / 108));
  CHECK(a.f == doctest::Approx(130.0 / 108));

  const HotellingF one = hotelling_to_f(7.5, 1, 12, 1, TestVariant::HotellingN);
  CHECK(one.f == doctest::Approx(7.5));
  CHECK(one.df2 == 12);

  const HotellingF b = hotelling_to_f(10, 6, 20, 1, TestVariant::HotellingN1);
  CHECK(b.df2 == 14);
  CHECK(b.scale == doctest::Approx(14.0 / (6 * 19)));
  const HotellingF c = hotelling_to_f(10, 6, 20, 1, TestVariant::HotellingN);
  CHECK(c.df2 == 15);
  CHECK(c.scale == doctest::Approx(15.0 / (6 * 20)));
  CHECK(a.f < b.f);
  CHECK(b.f < c.f);

  try {
    hotelling_to_f(3, 6, 7, 1, TestVariant::HotellingNq1);
    FAIL("expected InsufficientN");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientN);
  }
}

TEST_CASE("reference distributions and power maps") {
  const Reference chi = reference(TestVariant::Chi, 6, 30, 2);
  CHECK(chi.power(0.05, 0.0) == doctest::Approx(0.05).epsilon(1e-10));
  const Reference f = reference(TestVariant::HotellingNq1, 6, 30, 2);
  CHECK(f.power(0.05, 0.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(f.df2 == 22);
  CHECK(f.sf(f.critical(0.05)) == doctest::Approx(0.05).epsilon(1e-9));
  const Reference t = reference(TestVariant::HotellingN, 1, 25, 1);
  const double stat = 4.2;
  const double two_sided =
      2 * bm::cdf(bm::complement(bm::students_t_distribution<double>(t.df2), std::sqrt(stat)));
  CHECK(t.sf(stat) == doctest::Approx(two_sided).epsilon(1e-10));
  CHECK(min_sample_size(TestVariant::HotellingNq1, 6, 2) == 9);
  CHECK(min_sample_size(TestVariant::HotellingN1, 6, 2) == 7);
  CHECK(min_sample_size(TestVariant::HotellingN, 6, 2) == 6);
  CHECK(parse_variant("hotelling N-q-1") == TestVariant::HotellingNq1);
  CHECK(parse_variant(to_string(TestVariant::HotellingN1)) == TestVariant::HotellingN1);
  CHECK_THROWS_AS(parse_variant("wald"), Error);
}
