#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlmrt/basis.hpp"

namespace mlmrt {

// M_j levels becoming available on `day`.
struct LevelAddition {
  int count = 1;
  int day = 1;
};

struct AvailabilityPattern {
  Shape shape = Shape::Constant;
  double mean = 1.0;
  double initial = 1.0;
  // Day at which the linear-then-constant pattern levels off, or the vertex
  // day of the quadratic pattern.
  double plateau_day = 28.0;
};

// Full trial design. Time points are indexed r = (d-1)T + (t-1); levels are
// dense ids 1..M in addition order and column 0 of `prob` is control.
struct DesignSpec {
  int days = 0;
  int occasions_per_day = 1;
  std::vector<int> addition_day;   // addition_day[m-1] for level m
  Eigen::MatrixXd prob;            // (days*T) x (M+1)
  std::vector<double> availability;  // expected availability per time point

  int levels() const { return static_cast<int>(addition_day.size()); }
  int time_points() const { return days * occasions_per_day; }
  int day_of(int tp) const { return tp / occasions_per_day + 1; }
  int occasion_of(int tp) const { return tp % occasions_per_day + 1; }
  double elapsed_at(int tp) const {
    return mlmrt::elapsed(day_of(tp), occasion_of(tp), occasions_per_day);
  }
  double pi(int tp, int level) const { return prob(tp, level); }
  double control_prob(int tp) const { return prob(tp, 0); }
  // First time point at which `level` can be assigned.
  int first_time_point(int level) const {
    return (addition_day[level - 1] - 1) * occasions_per_day;
  }
};

struct Violation {
  int day = 0;       // 0 when not tied to a time point
  int occasion = 0;
  int level = -1;    // -1 when not tied to a level
  std::string message;
};

// Splits 1 - control_prob equally among the levels available at each time
// point. Throws InvalidProbability / InvalidSchedule.
DesignSpec build_uniform_design(int days, int occasions_per_day, double control_prob,
                                const std::vector<LevelAddition>& additions,
                                const AvailabilityPattern& availability = {});

std::vector<double> generate_availability(const AvailabilityPattern& pattern, int days,
                                          int occasions_per_day);

std::vector<Violation> validate(const DesignSpec& spec);

// Throws InvalidDesign listing every violation.
void require_valid(const DesignSpec& spec);

// Addition days expanded per level, e.g. {(2,1),(2,91)} -> {1,1,91,91}.
std::vector<int> expand_additions(const std::vector<LevelAddition>& additions);

}  // namespace mlmrt
