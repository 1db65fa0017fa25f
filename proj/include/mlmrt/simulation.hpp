#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "mlmrt/estimator.hpp"
#include "mlmrt/power.hpp"

namespace mlmrt {

// Monte Carlo plan. `trend` holds the standardized effects used to generate
// data (β = σ·δ); in precision mode the same coefficients are the precision
// target Δ.
struct SimulationPlan {
  DesignSpec design;
  EffectTrend trend;
  int q = 1;
  Eigen::VectorXd intercept;  // length q; empty means all ones
  double sigma = 1.0;
  double rho = 0.0;
  int n = 0;
  int replicates = 1000;
  std::uint64_t seed = 1;
  TestVariant variant = TestVariant::Chi;
  double alpha = 0.05;
  Method mode = Method::Power;
  int threads = 1;
};

// Throws InvalidConfig for σ <= 0, ρ outside [0,1), R < 1, bad q or N below
// the variant's df floor.
void check_plan(const SimulationPlan& plan);

struct GeneratedTrial {
  TrialDataset data;
  Eigen::VectorXd theta;  // (α, β) used to generate the outcomes
  ModelMatrix truth;      // rows the outcomes were generated from
};

// Replicate r draws from Philox stream r of the plan's seed, participant by
// participant: common error factor, then per time point availability,
// assignment and idiosyncratic error.
GeneratedTrial generate_trial(const SimulationPlan& plan, int replicate);
TrialDataset generate_dataset(const SimulationPlan& plan, int replicate);

struct McEstimate {
  double estimate = 0.0;  // empirical power or coverage
  double se = 0.0;        // binomial standard error
  double formula = 0.0;   // engine value at the plan's N
  int replicates = 0;     // successful replicates
  int failures = 0;
  std::string first_failure;
  double seconds = 0.0;
};

// Fails with SimulationFailed when more than 1% of replicates cannot be fit.
McEstimate estimate_power(const SimulationPlan& plan);
McEstimate estimate_coverage(const SimulationPlan& plan);
McEstimate run_simulation(const SimulationPlan& plan);

}  // namespace mlmrt
