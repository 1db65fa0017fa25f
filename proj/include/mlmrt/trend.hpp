#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mlmrt/basis.hpp"
#include "mlmrt/design.hpp"

namespace mlmrt {

// Per-level proximal-effect targets in standardized units. `plateau_day` is an
// absolute study day (for a level added on day d_j a 28-day ramp is
// d_j - 1 + 28) and is only read by the spline and quadratic shapes.
struct EffectTrend {
  Shape shape = Shape::LinearConstant;
  std::vector<double> initial;
  std::vector<double> mean;
  std::vector<double> plateau_day;

  int p() const { return basis_dimension(shape); }
  int levels() const { return static_cast<int>(mean.size()); }
};

// Same targets for every level, each ramping for `ramp_days` days from its
// own addition day.
EffectTrend uniform_trend(Shape shape, const std::vector<int>& addition_day, double initial,
                          double mean, int ramp_days = 28);

// Effect basis Z for `level` (1-based) at (day, occasion).
void z_basis(const EffectTrend& trend, int level, int day, int occasion, int occasions_per_day,
             std::span<double> out);
std::vector<double> z_basis(const EffectTrend& trend, int level, int day, int occasion,
                            int occasions_per_day);

// Coefficients of one level. The initial target holds at the level's first
// time point and the mean target is the average over the time points at
// which the level is available.
Eigen::VectorXd level_coefficients(const EffectTrend& trend, const DesignSpec& design, int level);

// All levels stacked, length M*p.
Eigen::VectorXd solve_coefficients(const EffectTrend& trend, const DesignSpec& design);

// δ_m at (day, occasion) for stacked coefficients.
double effect_at(const EffectTrend& trend, const Eigen::VectorXd& coef, int level, int day,
                 int occasion, int occasions_per_day);

// LevelMismatch when target vectors do not have one entry per level;
// DegenerateTrend for non-finite targets.
void check_trend(const EffectTrend& trend, const DesignSpec& design);

}  // namespace mlmrt
