#include <doctest.h>

#include <cmath>
#include <random>

#include "mlmrt/error.hpp"
#include "mlmrt/power.hpp"
#include "oracles.hpp"

using namespace mlmrt;

namespace {

ErrorKind kind_of(auto f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidConfig;
}

PowerModel table_model(int levels, int days, bool additions, double mean,
                       Shape shape = Shape::LinearConstant) {
  std::vector<LevelAddition> adds{{levels, 1}};
  if (additions) adds = {{2, 1}, {levels - 2, days / 2 + 1}};
  const DesignSpec d = build_uniform_design(days, 1, 0.6, adds);
  return PowerModel(d, uniform_trend(shape, d.addition_day, 0.02, mean), basis_dimension(shape));
}

constexpr TestVariant kAll[] = {TestVariant::Chi, TestVariant::HotellingN,
                                TestVariant::HotellingN1, TestVariant::HotellingNq1};

}  // namespace

TEST_CASE("Q closed forms") {
  const DesignSpec one = build_uniform_design(30, 1, 0.7, {{1, 1}});
  const auto c1 = build_Q(one, uniform_trend(Shape::Constant, one.addition_day, 0.1, 0.1));
  REQUIRE(c1.mp == 1);
  CHECK(c1.q(0, 0) == doctest::Approx(30 * 0.3 * 0.7));

  const DesignSpec two = build_uniform_design(10, 1, 0.6, {{2, 1}});
  const auto c2 = build_Q(two, uniform_trend(Shape::Constant, two.addition_day, 0.1, 0.1));
  Eigen::Matrix2d expect;
  expect << 0.16, -0.04, -0.04, 0.16;
  CHECK((c2.q - 10 * expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c2.q * c2.q_inv - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Q matches exact multinomial enumeration") {
  double worst = 0;
  for (Shape shape : {Shape::Constant, Shape::Linear, Shape::LinearConstant})
    for (int m : {1, 2, 3})
      for (int days : {4, 7, 10})
        for (int occ : {1, 2}) {
          std::vector<LevelAddition> adds{{1, 1}};
          if (m > 1) adds.push_back({m - 1, days / 2 + 1});
          AvailabilityPattern avail{Shape::Linear, 0.7, 0.9, 28};
          const DesignSpec d = build_uniform_design(days, occ, 0.55, adds, avail);
          EffectTrend t = uniform_trend(shape, d.addition_day, 0.05, 0.15, 3);
          const auto cov = build_Q(d, t);
          const Eigen::MatrixXd ref = oracle::q_enumeration(d, t);
          worst = std::max(worst, (cov.q - ref).cwiseAbs().maxCoeff());
          CHECK((cov.q - cov.q.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
  CHECK(worst <= 1e-10);
}

TEST_CASE("Q matches the Monte Carlo expectation") {
  const DesignSpec d = build_uniform_design(6, 1, 0.5, {{2, 1}, {1, 3}},
                                            {Shape::Constant, 0.8, 0.8, 28});
  const EffectTrend t = uniform_trend(Shape::Linear, d.addition_day, 0.05, 0.15);
  const Eigen::MatrixXd q = build_Q(d, t).q;
  const int dim = static_cast<int>(q.rows());
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u;
  const int reps = 1000000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim), sumsq = sum;
  Eigen::VectorXd x(dim);
  for (int r = 0; r < reps; ++r) {
    Eigen::MatrixXd draw = Eigen::MatrixXd::Zero(dim, dim);
    for (int tp = 0; tp < d.time_points(); ++tp) {
      if (u(gen) >= d.availability[tp]) continue;
      double v = u(gen);
      int a = 0;
      while (a < d.levels() && v >= d.prob(tp, a)) v -= d.prob(tp, a++);
      for (int m = 1; m <= d.levels(); ++m)
        x.segment(2 * (m - 1), 2) =
            ((a == m ? 1.0 : 0.0) - d.prob(tp, m)) * oracle::z(t, m, d.elapsed_at(tp));
      draw.noalias() += x * x.transpose();
    }
    sum += draw;
    sumsq += draw.cwiseProduct(draw);
  }
  const Eigen::MatrixXd mean = sum / reps;
  const Eigen::MatrixXd se = ((sumsq / reps - mean.cwiseProduct(mean)) / reps).cwiseSqrt();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) CHECK(std::abs(mean(i, j) - q(i, j)) <= 4 * se(i, j) + 1e-12);
}

TEST_CASE("noncentrality") {
  const DesignSpec one = build_uniform_design(20, 1, 0.5, {{1, 1}});
  const PowerModel m(one, uniform_trend(Shape::Constant, one.addition_day, 0.3, 0.3), 1);
  CHECK(m.noncentrality(12) == doctest::Approx(12 * 20 * 0.25 * 0.09));
  const PowerModel zero(one, uniform_trend(Shape::Constant, one.addition_day, 0.0, 0.0), 1);
  CHECK(zero.noncentrality(50) == 0.0);
  CHECK(zero.power(50, 0.05, TestVariant::Chi) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(zero.power(50, 0.05, TestVariant::HotellingN) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(kind_of([&] { zero.sample_size_power(0.05, 0.8, TestVariant::Chi); }) ==
        ErrorKind::NoSolution);
}

TEST_CASE("published power values") {
  const PowerModel t1 = table_model(3, 180, false, 0.2);
  CHECK(std::abs(t1.power(8, 0.05, TestVariant::Chi) - 0.83) <= 0.005);
  const PowerModel t3 = table_model(4, 180, true, 0.2);
  CHECK(std::abs(t3.power(17, 0.05, TestVariant::HotellingN) - 0.81) <= 0.005);
}

TEST_CASE("published sample sizes") {
  CHECK(table_model(3, 180, false, 0.2).sample_size_power(0.05, 0.8, TestVariant::Chi).n == 8);
  CHECK(table_model(3, 180, false, 0.1).sample_size_power(0.05, 0.8, TestVariant::Chi).n == 31);
  CHECK(table_model(3, 14, false, 0.1).sample_size_power(0.05, 0.8, TestVariant::HotellingNq1).n ==
        332);
  CHECK(table_model(4, 180, true, 0.2).sample_size_power(0.05, 0.8, TestVariant::HotellingN).n ==
        17);

  const SizingResult p25 =
      table_model(3, 180, false, 0.25).sample_size_precision(0.05, TestVariant::Chi);
  CHECK(p25.n == 7);
  CHECK(std::round(p25.value * 100) == 100);
  const SizingResult p15 =
      table_model(3, 180, false, 0.15).sample_size_precision(0.05, TestVariant::Chi);
  CHECK(p15.n == 13);
  CHECK(std::round(p15.value * 100) == 96);
  const SizingResult h =
      table_model(3, 14, false, 0.15).sample_size_precision(0.05, TestVariant::HotellingN);
  CHECK(h.n == 139);
  CHECK(std::round(h.value * 100) == 95);
}

TEST_CASE("power is increasing in N, effect size and alpha") {
  for (TestVariant v : kAll) {
    const PowerModel m = table_model(3, 28, false, 0.2);
    double prev = 0;
    for (int n = m.search_floor(v); n < 400; ++n) {
      const double p = m.power(n, 0.05, v);
      if (p < 1 - 1e-12) CHECK(p > prev);
      else CHECK(p >= prev - 1e-14);
      prev = p;
    }
    prev = 0;
    for (double e : {0.02, 0.05, 0.1, 0.15, 0.2, 0.3}) {
      const double p = table_model(3, 28, false, e).power(40, 0.05, v);
      CHECK(p > prev);
      prev = p;
    }
    prev = 0;
    for (double a : {0.001, 0.01, 0.05, 0.1, 0.2}) {
      const double p = m.power(40, a, v);
      CHECK(p > prev);
      prev = p;
    }
  }
}

TEST_CASE("sample sizes are minimal") {
  for (TestVariant v : kAll)
    for (int days : {14, 84})
      for (double e : {0.1, 0.2}) {
        const PowerModel m = table_model(4, days, true, e);
        const SizingResult r = m.sample_size_power(0.05, 0.8, v);
        CHECK(r.value >= 0.8);
        CHECK(r.value == m.power(r.n, 0.05, v));
        if (r.n - 1 >= m.search_floor(v)) CHECK(m.power(r.n - 1, 0.05, v) < 0.8);
        const SizingResult c = m.sample_size_precision(0.05, v);
        CHECK(c.value >= 0.95);
        if (c.n - 1 >= m.search_floor(v)) CHECK(m.coverage(c.n - 1, v) < 0.95);
      }
}

TEST_CASE("all variants converge for large N") {
  for (int m : {3, 4})
    for (int days : {180, 84, 28, 14}) {
      const PowerModel model = table_model(m, days, false, 0.02);
      const double chi = model.power(5000, 0.05, TestVariant::Chi);
      for (TestVariant v : kAll) CHECK(std::abs(model.power(5000, 0.05, v) - chi) < 0.005);
    }
}

TEST_CASE("huge precision targets give coverage one") {
  const PowerModel small = table_model(3, 28, false, 1e2);
  const PowerModel big = table_model(3, 28, false, 1e4);
  for (TestVariant v : kAll) {
    const int n = big.search_floor(v);
    CHECK(big.coverage(n, v) > 0.9999);
    CHECK(big.coverage(n, v) >= small.coverage(n, v));
    CHECK(big.coverage(n + 20, v) > 1 - 1e-9);
  }
}

TEST_CASE("errors") {
  const PowerModel m = table_model(3, 28, false, 0.2);
  CHECK(kind_of([&] { m.power(5, 0.05, TestVariant::HotellingNq1); }) == ErrorKind::InsufficientN);
  CHECK(kind_of([&] { m.sample_size_power(0.05, 0.8, TestVariant::Chi, 10); }) ==
        ErrorKind::NoSolution);
  CHECK(kind_of([&] { m.sample_size_power(0.05, 0.01, TestVariant::Chi); }) ==
        ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { m.sample_size_power(1.5, 0.8, TestVariant::Chi); }) ==
        ErrorKind::InvalidConfig);

  const DesignSpec late = build_uniform_design(10, 1, 0.6, {{1, 1}, {1, 10}});
  std::string msg;
  try {
    build_Q(late, uniform_trend(Shape::Linear, late.addition_day, 0.02, 0.2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularQ);
    msg = e.what();
  }
  CHECK(msg.find("level 2") != std::string::npos);

  DesignSpec bad = build_uniform_design(10, 1, 0.6, {{1, 1}});
  bad.prob(0, 0) = 0.9;
  CHECK(kind_of([&] { build_Q(bad, uniform_trend(Shape::Constant, {1}, 0.1, 0.1)); }) ==
        ErrorKind::InvalidDesign);
}
