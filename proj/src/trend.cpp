#include "mlmrt/trend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlmrt/error.hpp"

namespace mlmrt {

int basis_dimension(Shape shape) {
  switch (shape) {
    case Shape::Constant: return 1;
    case Shape::Linear:
    case Shape::LinearConstant: return 2;
    case Shape::Quadratic: return 3;
  }
  return 1;
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Constant: return "constant";
    case Shape::Linear: return "linear";
    case Shape::LinearConstant: return "linear and constant";
    case Shape::Quadratic: return "quadratic";
  }
  return "constant";
}

Shape parse_shape(std::string_view name) {
  if (name == "constant") return Shape::Constant;
  if (name == "linear") return Shape::Linear;
  if (name == "linear and constant" || name == "spline" || name == "linear-then-constant")
    return Shape::LinearConstant;
  if (name == "quadratic") return Shape::Quadratic;
  throw Error(ErrorKind::InvalidConfig,
              "unknown shape \"" + std::string(name) +
                  "\" (expected constant, linear, linear and constant, quadratic)");
}

void basis_row(Shape shape, double s, double turn, std::span<double> out) {
  out[0] = 1.0;
  switch (shape) {
    case Shape::Constant: break;
    case Shape::Linear: out[1] = s; break;
    case Shape::LinearConstant: out[1] = std::min(turn, s); break;
    case Shape::Quadratic:
      out[1] = s;
      out[2] = s * s;
      break;
  }
}

void intercept_row(int q, double s, std::span<double> out) {
  double v = 1.0;
  for (int j = 0; j < q; ++j) {
    out[j] = v;
    v *= s;
  }
}

std::vector<double> solve_shape(Shape shape, double turn, double s_start,
                                std::span<const double> window, double initial, double mean) {
  if (!std::isfinite(initial) || !std::isfinite(mean))
    throw Error(ErrorKind::DegenerateTrend, "trend targets must be finite");
  if (shape == Shape::Constant) return {mean};
  if (window.empty()) throw Error(ErrorKind::DegenerateTrend, "empty averaging window");

  const int p = basis_dimension(shape);
  std::vector<double> row(p);
  Eigen::MatrixXd a(p, p);
  Eigen::VectorXd rhs(p);

  basis_row(shape, s_start, turn, row);
  for (int j = 0; j < p; ++j) a(0, j) = row[j];
  rhs(0) = initial;

  Eigen::VectorXd avg = Eigen::VectorXd::Zero(p);
  for (double s : window) {
    basis_row(shape, s, turn, row);
    for (int j = 0; j < p; ++j) avg(j) += row[j];
  }
  avg /= static_cast<double>(window.size());
  a.row(1) = avg.transpose();
  rhs(1) = mean;

  if (shape == Shape::Quadratic) {
    a.row(2) << 0.0, 1.0, 2.0 * turn;
    rhs(2) = 0.0;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < p) {
    if (std::abs(mean - initial) <= 1e-15 * std::max(1.0, std::abs(mean))) {
      std::vector<double> flat(p, 0.0);
      flat[0] = mean;
      return flat;
    }
    throw Error(ErrorKind::DegenerateTrend,
                std::string(to_string(shape)) + " trend cannot reach mean " +
                    std::to_string(mean) + " from initial " + std::to_string(initial) +
                    " (plateau at elapsed time " + std::to_string(turn) + ")");
  }
  Eigen::VectorXd c = lu.solve(rhs);
  return {c.data(), c.data() + p};
}

EffectTrend uniform_trend(Shape shape, const std::vector<int>& addition_day, double initial,
                          double mean, int ramp_days) {
  EffectTrend t;
  t.shape = shape;
  const std::size_t m = addition_day.size();
  t.initial.assign(m, initial);
  t.mean.assign(m, mean);
  t.plateau_day.resize(m);
  for (std::size_t i = 0; i < m; ++i) t.plateau_day[i] = addition_day[i] - 1 + ramp_days;
  return t;
}

void z_basis(const EffectTrend& trend, int level, int day, int occasion, int occasions_per_day,
             std::span<double> out) {
  const double turn = trend.plateau_day.empty() ? 0.0 : trend.plateau_day[level - 1] - 1.0;
  basis_row(trend.shape, elapsed(day, occasion, occasions_per_day), turn, out);
}

std::vector<double> z_basis(const EffectTrend& trend, int level, int day, int occasion,
                            int occasions_per_day) {
  std::vector<double> out(trend.p());
  z_basis(trend, level, day, occasion, occasions_per_day, out);
  return out;
}

void check_trend(const EffectTrend& trend, const DesignSpec& design) {
  const std::size_t m = design.levels();
  const bool needs_plateau =
      trend.shape == Shape::LinearConstant || trend.shape == Shape::Quadratic;
  if (trend.mean.size() != m || trend.initial.size() != m ||
      (needs_plateau && trend.plateau_day.size() != m)) {
    throw Error(ErrorKind::LevelMismatch,
                "trend targets need one entry per level (" + std::to_string(m) +
                    " levels; got mean " + std::to_string(trend.mean.size()) + ", initial " +
                    std::to_string(trend.initial.size()) + ", plateau " +
                    std::to_string(trend.plateau_day.size()) + ")");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(trend.mean[i]) || !std::isfinite(trend.initial[i]) ||
        (needs_plateau && !std::isfinite(trend.plateau_day[i]))) {
      throw Error(ErrorKind::DegenerateTrend,
                  "non-finite trend target for level " + std::to_string(i + 1));
    }
  }
}

Eigen::VectorXd level_coefficients(const EffectTrend& trend, const DesignSpec& design, int level) {
  const int first = design.first_time_point(level);
  const int n = design.time_points();
  std::vector<double> window;
  window.reserve(n - first);
  for (int tp = first; tp < n; ++tp) window.push_back(design.elapsed_at(tp));
  const double turn = trend.plateau_day.empty() ? 0.0 : trend.plateau_day[level - 1] - 1.0;
  std::vector<double> c;
  try {
    c = solve_shape(trend.shape, turn, design.elapsed_at(first), window,
                    trend.initial[level - 1], trend.mean[level - 1]);
  } catch (const Error& e) {
    throw Error(e.kind(), "level " + std::to_string(level) + ": " + e.what());
  }
  return Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

Eigen::VectorXd solve_coefficients(const EffectTrend& trend, const DesignSpec& design) {
  check_trend(trend, design);
  const int p = trend.p();
  const int m = design.levels();
  Eigen::VectorXd out(m * p);
  for (int l = 1; l <= m; ++l) out.segment((l - 1) * p, p) = level_coefficients(trend, design, l);
  return out;
}

double effect_at(const EffectTrend& trend, const Eigen::VectorXd& coef, int level, int day,
                 int occasion, int occasions_per_day) {
  const int p = trend.p();
  double z[3];
  z_basis(trend, level, day, occasion, occasions_per_day, std::span<double>(z, p));
  double v = 0.0;
  for (int j = 0; j < p; ++j) v += z[j] * coef((level - 1) * p + j);
  return v;
}

}  // namespace mlmrt
