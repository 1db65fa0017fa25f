#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlmrt/design.hpp"
#include "mlmrt/distributions.hpp"
#include "mlmrt/power.hpp"
#include "mlmrt/simulation.hpp"
#include "mlmrt/trend.hpp"

namespace mlmrt {

using json = nlohmann::json;

enum class ResultKind { SampleSize, Power, Coverage };

std::string_view to_string(ResultKind r);
// "choice_sample_size", "choice_power", "choice_coverage_probability".
ResultKind parse_result(std::string_view name);

// Either {"control": c} (remaining mass split equally among available
// levels) or an explicit matrix {"levels": [0, 1, ...], "rows": [[...], ...]}
// with one row per time point and column 0 the control level.
struct ProbSpec {
  std::optional<double> control;
  std::vector<int> levels;
  std::vector<std::vector<double>> rows;
};

// Keys mirror the arguments of the original R calculator; `q`, `alpha`,
// `replicates`, `seed`, `threads` and `max_n` are extensions.
struct RunConfig {
  int days = 0;
  int occ_per_day = 1;
  std::vector<int> aa_day_aa;
  ProbSpec prob;
  Shape beta_shape = Shape::LinearConstant;
  std::vector<double> beta_mean;
  std::vector<double> beta_initial;
  std::vector<double> beta_quadratic_max;
  Shape tau_shape = Shape::Constant;
  double tau_mean = 1.0;
  double tau_initial = 1.0;
  double tau_quadratic_max = 28.0;
  double sigma = 1.0;
  double rho = 0.0;
  double pow = 0.8;
  double sigLev = 0.05;
  Method method = Method::Power;
  TestVariant test = TestVariant::HotellingN;
  ResultKind result = ResultKind::SampleSize;
  std::optional<int> SS;
  std::optional<int> q;  // defaults to p
  std::vector<double> alpha;
  int replicates = 1000;
  std::uint64_t seed = 20240501;
  int threads = 1;
  int max_n = 1000000;

  int intercept_dim() const { return q.value_or(basis_dimension(beta_shape)); }
};

// Throws ConfigError with the JSON path of the first offending field;
// unknown keys are rejected.
RunConfig parse_config(const json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);
json to_json(const RunConfig& cfg);

struct ResolvedConfig {
  DesignSpec design;
  EffectTrend trend;
  int q = 1;
};

// Expands the probability shorthand, generates availability and checks
// every design and trend invariant. Design violations are reported as
// ConfigErrors under "prob" naming row and column.
ResolvedConfig resolve(const RunConfig& cfg);

SimulationPlan make_plan(const RunConfig& cfg, const ResolvedConfig& rc, int n);

// The demo configuration: 180 days, two levels from day 1 and two from
// day 91, spline effects (initial 0.02, mean 0.2), Hotelling N, power 0.8.
RunConfig demo_config();

}  // namespace mlmrt
