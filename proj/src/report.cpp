#include "mlmrt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>

#include "mlmrt/estimator.hpp"
#include "mlmrt/simulation.hpp"

namespace mlmrt {

namespace {

std::string percent(double v) { return std::to_string(static_cast<int>(std::lround(100.0 * v))) + "%"; }

std::string level(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

const char* value_key(Method m) { return m == Method::Power ? "P" : "CP"; }
const char* value_noun(Method m) { return m == Method::Power ? "power" : "coverage probability"; }

json base(const RunConfig& cfg) {
  return {{"config", to_json(cfg)}, {"version", engine_version()}};
}

PowerModel model_for(const ResolvedConfig& rc) {
  return PowerModel(rc.design, rc.trend, rc.q);
}

int sized_n(const RunConfig& cfg, const PowerModel& model) {
  const SizingResult r = cfg.method == Method::Power
                             ? model.sample_size_power(cfg.sigLev, cfg.pow, cfg.test, cfg.max_n)
                             : model.sample_size_precision(cfg.sigLev, cfg.test, cfg.max_n);
  return r.n;
}

json mc_json(const McEstimate& e) {
  return {{"estimate", e.estimate},   {"se", e.se},
          {"formula", e.formula},     {"discrepancy", e.estimate - e.formula},
          {"replicates", e.replicates}, {"failures", e.failures},
          {"seconds", e.seconds}};
}

}  // namespace

const char* engine_version() { return MLMRT_VERSION; }

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoSolution:
    case ErrorKind::InsufficientN:
    case ErrorKind::RankDeficient:
    case ErrorKind::SingularLeverage:
    case ErrorKind::NonConvergence:
    case ErrorKind::SimulationFailed:
      return 3;
    default:
      return 2;
  }
}

json sizing_report(const RunConfig& cfg) {
  const ResolvedConfig rc = resolve(cfg);
  const PowerModel model = model_for(rc);
  json out = base(cfg);
  out["result"] = std::string(to_string(cfg.result));
  out["test"] = std::string(to_string(cfg.test));
  out["method"] = std::string(to_string(cfg.method));
  out["Mp"] = model.mp();
  out["information"] = model.information();

  if (cfg.result == ResultKind::SampleSize) {
    const SizingResult r = cfg.method == Method::Power
                               ? model.sample_size_power(cfg.sigLev, cfg.pow, cfg.test, cfg.max_n)
                               : model.sample_size_precision(cfg.sigLev, cfg.test, cfg.max_n);
    out["N"] = r.n;
    out[value_key(cfg.method)] = r.value;
    out["lambda"] = r.lambda;
    out["df1"] = r.df1;
    out["df2"] = r.df2;
    const double target = cfg.method == Method::Power ? cfg.pow : 1.0 - cfg.sigLev;
    out["sentence"] = "The required sample size is " + std::to_string(r.n) + " to attain " +
                      percent(target) + " " + value_noun(cfg.method) +
                      " when the significance level is " + level(cfg.sigLev) + ".";
    return out;
  }

  const int n = *cfg.SS;
  const Method m = cfg.result == ResultKind::Power ? Method::Power : Method::Precision;
  const Reference ref = reference(cfg.test, model.mp(), n, rc.q);
  const double value =
      m == Method::Power ? model.power(n, cfg.sigLev, cfg.test) : model.coverage(n, cfg.test);
  out["N"] = n;
  out[value_key(m)] = value;
  out["lambda"] = model.noncentrality(n);
  out["df1"] = ref.df1;
  out["df2"] = ref.df2;
  out["sentence"] = "The sample size " + std::to_string(n) + " gives " + percent(value) + " " +
                    value_noun(m) + " when the significance level is " + level(cfg.sigLev) + ".";
  return out;
}

json simulation_report(const RunConfig& cfg, std::optional<int> n) {
  const ResolvedConfig rc = resolve(cfg);
  int size = 0;
  if (n) size = *n;
  else if (cfg.SS) size = *cfg.SS;
  else size = sized_n(cfg, model_for(rc));
  const McEstimate e = run_simulation(make_plan(cfg, rc, size));
  json out = base(cfg);
  out["N"] = size;
  out["test"] = std::string(to_string(cfg.test));
  out["method"] = std::string(to_string(cfg.method));
  out["monte_carlo"] = mc_json(e);
  out[std::string("MC_") + value_key(cfg.method)] = e.estimate;
  out[value_key(cfg.method)] = e.formula;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "Monte Carlo %s at N = %d over %d replicates is %.3f (SE %.3f); the formula gives %.3f.",
                value_noun(cfg.method), size, e.replicates, e.estimate, e.se, e.formula);
  out["sentence"] = buf;
  return out;
}

json power_curve_report(const RunConfig& cfg, int nmin, int nmax) {
  if (nmax < nmin) throw ConfigError("nmax", "must be >= nmin");
  if (nmax - nmin > 10000) throw ConfigError("nmax", "at most 10001 points per curve");
  const ResolvedConfig rc = resolve(cfg);
  const PowerModel model = model_for(rc);
  const int lo = std::max(nmin, model.search_floor(cfg.test));
  const char* key = value_key(cfg.method);
  json curve = json::array();
  for (int n = lo; n <= nmax; ++n) {
    const double v = cfg.method == Method::Power ? model.power(n, cfg.sigLev, cfg.test)
                                                 : model.coverage(n, cfg.test);
    curve.push_back({{"N", n}, {key, v}});
  }
  json out = base(cfg);
  out["nmin"] = lo;
  out["nmax"] = nmax;
  out["method"] = std::string(to_string(cfg.method));
  out["test"] = std::string(to_string(cfg.test));
  out["curve"] = std::move(curve);
  try {
    out["N"] = sized_n(cfg, model);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoSolution) throw;
    out["N"] = nullptr;
  }
  return out;
}

json analysis_report(std::istream& csv, const RunConfig& design_cfg,
                     const std::optional<RunConfig>& followup) {
  const ResolvedConfig rc = resolve(design_cfg);
  const TrialDataset data = read_csv(csv, rc.design);
  const FitResult f = fit(data, rc.trend, rc.q);
  const TestResult t = test(f, design_cfg.test, design_cfg.sigLev);

  json out = base(design_cfg);
  out["participants"] = f.n;
  out["sigma_hat"] = f.sigma_hat;
  out["test"] = std::string(to_string(t.variant));
  out["statistic"] = t.statistic;
  out["df1"] = t.df1;
  out["df2"] = t.df2;
  out["p_value"] = t.p_value;
  out["reject"] = t.reject;
  json coef = json::array();
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    coef.push_back({{"name", f.columns[c]},
                    {"estimate", f.theta(i)},
                    {"se", std::sqrt(f.cov_plugin(i, i) / f.n)}});
  }
  out["coefficients"] = std::move(coef);
  json levels = json::array();
  for (const LevelSummary& l : f.levels) {
    levels.push_back({{"level", l.level},
                      {"initial", l.initial},
                      {"initial_se", l.initial_se},
                      {"average", l.average},
                      {"average_se", l.average_se},
                      {"standardized_initial", l.initial / f.sigma_hat},
                      {"standardized_average", l.standardized_average}});
  }
  out["levels"] = std::move(levels);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s test of no effect: statistic %.3f, p-value %.4g (N = %d).",
                std::string(to_string(t.variant)).c_str(), t.statistic, t.p_value, f.n);
  out["sentence"] = buf;
  if (followup) out["followup"] = sizing_report(chain_followup(*followup, out));
  return out;
}

RunConfig chain_followup(const RunConfig& followup, const json& analysis) {
  const json& levels = analysis.at("levels");
  if (levels.size() != followup.aa_day_aa.size())
    throw Error(ErrorKind::LevelMismatch,
                "follow-up config has " + std::to_string(followup.aa_day_aa.size()) +
                    " levels but the analysis estimated " + std::to_string(levels.size()));
  RunConfig c = followup;
  c.result = ResultKind::SampleSize;
  c.beta_mean.clear();
  c.beta_initial.clear();
  for (const json& l : levels) {
    c.beta_mean.push_back(l.at("standardized_average").get<double>());
    c.beta_initial.push_back(l.at("standardized_initial").get<double>());
  }
  if (c.beta_shape == Shape::Constant) c.beta_initial = c.beta_mean;
  return c;
}

json error_json(const Error& e) {
  json out = {{"error", e.what()},
              {"kind", to_string(e.kind())},
              {"path", nullptr},
              {"version", engine_version()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) out["path"] = ce->path();
  return out;
}

}  // namespace mlmrt
