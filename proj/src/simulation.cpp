#include "mlmrt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>
#include <vector>

#include "mlmrt/error.hpp"
#include "mlmrt/rng.hpp"

namespace mlmrt {

void check_plan(const SimulationPlan& plan) {
  if (!(plan.sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
  if (!(plan.rho >= 0.0 && plan.rho < 1.0)) throw ConfigError("rho", "must lie in [0,1)");
  if (plan.replicates < 1) throw ConfigError("replicates", "must be >= 1");
  if (plan.q < 1) throw ConfigError("q", "must be >= 1");
  if (plan.intercept.size() != 0 && plan.intercept.size() != plan.q)
    throw ConfigError("alpha", "needs q = " + std::to_string(plan.q) + " entries");
  if (plan.threads < 1) throw ConfigError("threads", "must be >= 1");
  require_valid(plan.design);
  check_trend(plan.trend, plan.design);
  const int mp = plan.design.levels() * plan.trend.p();
  const int floor = min_sample_size(plan.variant, mp, plan.q);
  if (plan.n < std::max(floor, 2))
    throw Error(ErrorKind::InsufficientN, "N = " + std::to_string(plan.n) + " is below the " +
                                              std::string(to_string(plan.variant)) +
                                              " floor " + std::to_string(std::max(floor, 2)));
}

GeneratedTrial generate_trial(const SimulationPlan& plan, int replicate) {
  const DesignSpec& design = plan.design;
  const int q = plan.q;
  const int p = plan.trend.p();
  const int m_total = design.levels();
  const int k = q + m_total * p;
  const int n_tp = design.time_points();

  GeneratedTrial g;
  g.theta.resize(k);
  if (plan.intercept.size() == q) g.theta.head(q) = plan.intercept;
  else g.theta.head(q).setOnes();
  g.theta.tail(m_total * p) = plan.sigma * solve_coefficients(plan.trend, design);

  g.data.design = design;
  g.data.records.reserve(static_cast<std::size_t>(plan.n) * n_tp);
  g.truth.q = q;
  g.truth.p = p;
  g.truth.levels = m_total;
  for (int c = 0; c < k; ++c) {
    g.truth.columns.push_back(c < q ? "alpha[" + std::to_string(c) + "]"
                                    : "beta[" + std::to_string((c - q) / p + 1) + "][" +
                                          std::to_string((c - q) % p) + "]");
  }

  const double common = std::sqrt(plan.rho);
  const double own = std::sqrt(1.0 - plan.rho);
  std::vector<double> probs(m_total + 1);
  std::vector<double> row(k);
  Philox rng(plan.seed, static_cast<std::uint64_t>(replicate));
  for (int i = 1; i <= plan.n; ++i) {
    ParticipantRows pr;
    pr.id = i;
    std::vector<double> xs;
    std::vector<double> ys;
    const double factor = rng.normal();
    for (int tp = 0; tp < n_tp; ++tp) {
      const bool available = rng.bernoulli(design.availability[tp]);
      for (int c = 0; c <= m_total; ++c) probs[c] = design.prob(tp, c);
      int level = rng.categorical(probs.data(), m_total + 1);
      const double eps = plan.sigma * (common * factor + own * rng.normal());
      if (!available) level = 0;
      model_row(design, plan.trend, q, tp, level, row.data());
      double mean = 0.0;
      for (int c = 0; c < k; ++c) mean += row[c] * g.theta(c);
      const double y = mean + eps;
      g.data.records.push_back(
          {i, design.day_of(tp), design.occasion_of(tp), available, level, y});
      if (!available) continue;
      pr.time_points.push_back(tp);
      xs.insert(xs.end(), row.begin(), row.end());
      ys.push_back(y);
    }
    const auto rows = static_cast<Eigen::Index>(ys.size());
    pr.x = Eigen::Map<RowMatrix>(xs.data(), rows, k);
    pr.y = Eigen::Map<Eigen::VectorXd>(ys.data(), rows);
    g.truth.participants.push_back(std::move(pr));
  }
  return g;
}

TrialDataset generate_dataset(const SimulationPlan& plan, int replicate) {
  return generate_trial(plan, replicate).data;
}

namespace {

McEstimate run(const SimulationPlan& plan, Method mode) {
  check_plan(plan);
  const auto start = std::chrono::steady_clock::now();
  const PowerModel model(plan.design, plan.trend, plan.q);
  const double threshold = plan.n * model.information();
  const Eigen::VectorXd beta_true = plan.sigma * model.delta();

  // 1 = event, 0 = no event, -1 = fit failure.
  std::vector<signed char> outcome(plan.replicates, 0);
  std::vector<std::string> errors(plan.replicates);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < plan.replicates; r = next++) {
      try {
        const GeneratedTrial g = generate_trial(plan, r);
        const FitResult f = fit(build_design_matrix(g.data, plan.trend, plan.q));
        bool event;
        if (mode == Method::Power) event = test(f, plan.variant, plan.alpha).reject;
        else event = wald_distance(f, beta_true, plan.variant) <= threshold;
        outcome[r] = event ? 1 : 0;
      } catch (const Error& e) {
        outcome[r] = -1;
        errors[r] = e.what();
      }
    }
  };
  const int threads = std::min(plan.threads, plan.replicates);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  McEstimate est;
  int events = 0;
  for (int r = 0; r < plan.replicates; ++r) {
    if (outcome[r] < 0) {
      if (est.failures++ == 0) est.first_failure = errors[r];
      continue;
    }
    events += outcome[r];
    ++est.replicates;
  }
  if (est.failures * 100 > plan.replicates) {
    throw Error(ErrorKind::SimulationFailed,
                std::to_string(est.failures) + " of " + std::to_string(plan.replicates) +
                    " replicates failed; first: " + est.first_failure);
  }
  est.estimate = static_cast<double>(events) / est.replicates;
  est.se = std::sqrt(est.estimate * (1.0 - est.estimate) / est.replicates);
  est.formula = mode == Method::Power ? model.power(plan.n, plan.alpha, plan.variant)
                                      : model.coverage(plan.n, plan.variant);
  est.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

}  // namespace

McEstimate estimate_power(const SimulationPlan& plan) { return run(plan, Method::Power); }
McEstimate estimate_coverage(const SimulationPlan& plan) { return run(plan, Method::Precision); }
McEstimate run_simulation(const SimulationPlan& plan) { return run(plan, plan.mode); }

}  // namespace mlmrt
