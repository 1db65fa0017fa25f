#include "mlmrt/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlmrt/error.hpp"

namespace mlmrt {

namespace {

constexpr double kSumTolerance = 1e-12;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string where(const DesignSpec& spec, int tp) {
  std::string s = "day " + std::to_string(spec.day_of(tp));
  if (spec.occasions_per_day > 1) s += " occasion " + std::to_string(spec.occasion_of(tp));
  return s;
}

}  // namespace

std::vector<int> expand_additions(const std::vector<LevelAddition>& additions) {
  std::vector<int> out;
  for (const auto& a : additions)
    for (int i = 0; i < a.count; ++i) out.push_back(a.day);
  return out;
}

std::vector<double> generate_availability(const AvailabilityPattern& pattern, int days,
                                          int occasions_per_day) {
  const int n = days * occasions_per_day;
  std::vector<double> window(n);
  for (int tp = 0; tp < n; ++tp)
    window[tp] = elapsed(tp / occasions_per_day + 1, tp % occasions_per_day + 1,
                         occasions_per_day);

  const double turn = pattern.plateau_day - 1.0;
  std::vector<double> coef;
  try {
    coef = solve_shape(pattern.shape, turn, 0.0, window, pattern.initial, pattern.mean);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidProbability,
                std::string("availability pattern is degenerate: ") + e.what());
  }

  const int p = basis_dimension(pattern.shape);
  std::vector<double> row(p);
  std::vector<double> tau(n);
  for (int tp = 0; tp < n; ++tp) {
    basis_row(pattern.shape, window[tp], turn, row);
    double v = 0.0;
    for (int j = 0; j < p; ++j) v += row[j] * coef[j];
    if (v < -1e-12 || v > 1.0 + 1e-12) {
      throw Error(ErrorKind::InvalidProbability,
                  "availability pattern (mean " + num(pattern.mean) + ", initial " +
                      num(pattern.initial) + ") leaves [0,1] at time point " +
                      std::to_string(tp + 1) + " (value " + num(v) + ")");
    }
    tau[tp] = std::clamp(v, 0.0, 1.0);
  }
  return tau;
}

DesignSpec build_uniform_design(int days, int occasions_per_day, double control_prob,
                                const std::vector<LevelAddition>& additions,
                                const AvailabilityPattern& availability) {
  if (!(control_prob > 0.0 && control_prob < 1.0))
    throw Error(ErrorKind::InvalidProbability,
                "control probability must lie in (0,1), got " + num(control_prob));
  if (days < 1 || occasions_per_day < 1)
    throw Error(ErrorKind::InvalidSchedule, "days and occasions per day must be positive");
  if (additions.empty())
    throw Error(ErrorKind::InvalidSchedule, "at least one level addition is required");
  for (std::size_t j = 0; j < additions.size(); ++j) {
    const auto& a = additions[j];
    if (a.count < 1)
      throw Error(ErrorKind::InvalidSchedule, "each addition must add at least one level");
    if (a.day < 1 || a.day > days)
      throw Error(ErrorKind::InvalidSchedule,
                  "addition day " + std::to_string(a.day) + " outside [1, " +
                      std::to_string(days) + "]");
    if (j == 0 && a.day != 1)
      throw Error(ErrorKind::InvalidSchedule, "the first levels must be available on day 1");
    if (j > 0 && a.day <= additions[j - 1].day)
      throw Error(ErrorKind::InvalidSchedule, "addition days must be strictly increasing");
  }

  DesignSpec spec;
  spec.days = days;
  spec.occasions_per_day = occasions_per_day;
  spec.addition_day = expand_additions(additions);
  const int m_total = spec.levels();
  const int n = spec.time_points();
  spec.prob = Eigen::MatrixXd::Zero(n, m_total + 1);
  for (int tp = 0; tp < n; ++tp) {
    const int d = spec.day_of(tp);
    int available = 0;
    for (int m = 0; m < m_total; ++m) available += spec.addition_day[m] <= d;
    spec.prob(tp, 0) = control_prob;
    const double share = (1.0 - control_prob) / available;
    for (int m = 0; m < m_total; ++m)
      if (spec.addition_day[m] <= d) spec.prob(tp, m + 1) = share;
  }
  spec.availability = generate_availability(availability, days, occasions_per_day);
  return spec;
}

std::vector<Violation> validate(const DesignSpec& spec) {
  std::vector<Violation> out;
  if (spec.days < 1) out.push_back({0, 0, -1, "days must be positive"});
  if (spec.occasions_per_day < 1) out.push_back({0, 0, -1, "occasions per day must be positive"});
  if (!out.empty()) return out;

  const int m_total = spec.levels();
  const int n = spec.time_points();
  if (m_total < 1) out.push_back({0, 0, -1, "at least one intervention level is required"});
  if (spec.prob.rows() != n || spec.prob.cols() != m_total + 1) {
    out.push_back({0, 0, -1,
                   "probability matrix is " + std::to_string(spec.prob.rows()) + "x" +
                       std::to_string(spec.prob.cols()) + ", expected " + std::to_string(n) +
                       "x" + std::to_string(m_total + 1)});
    return out;
  }
  if (static_cast<int>(spec.availability.size()) != n) {
    out.push_back({0, 0, -1,
                   "availability has " + std::to_string(spec.availability.size()) +
                       " entries, expected " + std::to_string(n)});
  }

  for (int m = 1; m <= m_total; ++m) {
    const int d = spec.addition_day[m - 1];
    if (d < 1 || d > spec.days) {
      out.push_back({0, 0, m,
                     "level " + std::to_string(m) + " addition day " + std::to_string(d) +
                         " outside [1, " + std::to_string(spec.days) + "]"});
    }
    if (m > 1 && d < spec.addition_day[m - 2]) {
      out.push_back({0, 0, m, "level ids must follow addition order (level " +
                                  std::to_string(m) + " added before level " +
                                  std::to_string(m - 1) + ")"});
    }
  }
  if (m_total >= 1 && spec.addition_day[0] != 1)
    out.push_back({0, 0, 1, "the first level must be available on day 1"});

  for (int tp = 0; tp < n; ++tp) {
    const int day = spec.day_of(tp);
    const int occ = spec.occasion_of(tp);
    double sum = 0.0;
    for (int c = 0; c <= m_total; ++c) {
      const double v = spec.prob(tp, c);
      sum += v;
      if (!(v >= 0.0 && v <= 1.0)) {
        out.push_back({day, occ, c,
                       "probability " + num(v) + " of level " + std::to_string(c) +
                           " outside [0,1] at " + where(spec, tp)});
      }
      if (c >= 1 && v != 0.0 && day < spec.addition_day[c - 1]) {
        out.push_back({day, occ, c,
                       "level " + std::to_string(c) + " has probability " + num(v) +
                           " before its addition day " +
                           std::to_string(spec.addition_day[c - 1]) + " at " +
                           where(spec, tp)});
      }
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      out.push_back({day, occ, -1, "probabilities sum to " + num(sum) + " at " + where(spec, tp)});
    }
    if (tp < static_cast<int>(spec.availability.size())) {
      const double tau = spec.availability[tp];
      if (!(tau >= 0.0 && tau <= 1.0))
        out.push_back({day, occ, -1,
                       "availability " + num(tau) + " outside [0,1] at " + where(spec, tp)});
    }
  }
  return out;
}

void require_valid(const DesignSpec& spec) {
  const auto violations = validate(spec);
  if (violations.empty()) return;
  std::string msg = "invalid design: ";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) msg += "; ";
    msg += violations[i].message;
  }
  if (violations.size() > shown)
    msg += "; (" + std::to_string(violations.size() - shown) + " more)";
  throw Error(ErrorKind::InvalidDesign, msg);
}

}  // namespace mlmrt
