#include "mlmrt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mlmrt/error.hpp"

namespace mlmrt {

namespace {

const std::set<std::string> kKeys = {
    "days",       "occ_per_day", "aa_day_aa",         "prob",        "beta_shape",
    "beta_mean",  "beta_initial", "beta_quadratic_max", "tau_shape",  "tau_mean",
    "tau_initial", "tau_quadratic_max", "sigma",        "rho",         "pow",
    "sigLev",     "method",      "test",              "result",      "SS",
    "q",          "alpha",       "replicates",        "seed",        "threads",
    "max_n"};

std::string idx(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

long long integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
      return static_cast<long long>(d);
  }
  throw ConfigError(path, "expected an integer");
}

int positive_int(const json& v, const std::string& path) {
  const long long x = integer(v, path);
  if (x < 1 || x > 100000000) throw ConfigError(path, "must be a positive integer");
  return static_cast<int>(x);
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

// A number broadcasts to every level; arrays are taken as given.
std::vector<double> numbers(const json& v, const std::string& path) {
  if (v.is_number()) return {number(v, path)};
  if (!v.is_array()) throw ConfigError(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], idx(path, i)));
  return out;
}

template <class F>
auto wrap(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<double> per_level(const std::vector<double>& v, std::size_t m, const std::string& path) {
  if (v.size() == m) return v;
  if (v.size() == 1) return std::vector<double>(m, v[0]);
  throw ConfigError(path, "needs one entry per level (" + std::to_string(m) + "), got " +
                              std::to_string(v.size()));
}

}  // namespace

std::string_view to_string(ResultKind r) {
  switch (r) {
    case ResultKind::SampleSize: return "choice_sample_size";
    case ResultKind::Power: return "choice_power";
    case ResultKind::Coverage: return "choice_coverage_probability";
  }
  return "choice_sample_size";
}

ResultKind parse_result(std::string_view name) {
  if (name == "choice_sample_size") return ResultKind::SampleSize;
  if (name == "choice_power") return ResultKind::Power;
  if (name == "choice_coverage_probability") return ResultKind::Coverage;
  throw Error(ErrorKind::InvalidConfig,
              "unknown result \"" + std::string(name) +
                  "\" (expected choice_sample_size, choice_power, choice_coverage_probability)");
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!kKeys.count(key)) throw ConfigError(key, "unknown key");

  auto need = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw ConfigError(key, "required");
    return doc.at(key);
  };

  RunConfig c;
  c.days = positive_int(need("days"), "days");
  if (doc.contains("occ_per_day")) c.occ_per_day = positive_int(doc["occ_per_day"], "occ_per_day");

  const json& aa = need("aa_day_aa");
  if (!aa.is_array() || aa.empty())
    throw ConfigError("aa_day_aa", "expected a non-empty array of addition days");
  for (std::size_t i = 0; i < aa.size(); ++i) {
    const int d = positive_int(aa[i], idx("aa_day_aa", i));
    if (d > c.days)
      throw ConfigError(idx("aa_day_aa", i), "day " + std::to_string(d) + " is after the study ends");
    if (i == 0 && d != 1) throw ConfigError(idx("aa_day_aa", i), "the first level must start on day 1");
    if (i > 0 && d < c.aa_day_aa.back())
      throw ConfigError(idx("aa_day_aa", i), "addition days must be non-decreasing");
    c.aa_day_aa.push_back(d);
  }

  const json& prob = need("prob");
  if (!prob.is_object()) throw ConfigError("prob", "expected an object");
  if (prob.contains("control")) {
    if (prob.size() != 1) throw ConfigError("prob", "shorthand form takes only \"control\"");
    c.prob.control = number(prob["control"], "prob.control");
    if (!(*c.prob.control > 0.0 && *c.prob.control < 1.0))
      throw ConfigError("prob.control", "must lie in (0,1)");
  } else {
    for (const auto& [key, _] : prob.items())
      if (key != "levels" && key != "rows") throw ConfigError("prob." + key, "unknown key");
    if (!prob.contains("levels") || !prob.contains("rows"))
      throw ConfigError("prob", "expected {\"control\": c} or {\"levels\": [...], \"rows\": [[...]]}");
    const json& lv = prob["levels"];
    if (!lv.is_array()) throw ConfigError("prob.levels", "expected an array");
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const long long id = integer(lv[i], idx("prob.levels", i));
      if (id != static_cast<long long>(i))
        throw ConfigError(idx("prob.levels", i), "level ids must be 0 (control), 1, ..., M in order");
      c.prob.levels.push_back(static_cast<int>(id));
    }
    const json& rows = prob["rows"];
    if (!rows.is_array()) throw ConfigError("prob.rows", "expected an array of rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rp = idx("prob.rows", r);
      if (!rows[r].is_array()) throw ConfigError(rp, "expected an array");
      if (rows[r].size() != lv.size())
        throw ConfigError(rp, "has " + std::to_string(rows[r].size()) + " entries, expected " +
                                  std::to_string(lv.size()));
      std::vector<double> row;
      for (std::size_t j = 0; j < rows[r].size(); ++j) row.push_back(number(rows[r][j], idx(rp, j)));
      c.prob.rows.push_back(std::move(row));
    }
  }

  c.beta_shape = wrap("beta_shape", [&] { return parse_shape(text(need("beta_shape"), "beta_shape")); });
  c.beta_mean = numbers(need("beta_mean"), "beta_mean");
  if (doc.contains("beta_initial")) c.beta_initial = numbers(doc["beta_initial"], "beta_initial");
  else if (c.beta_shape == Shape::Constant) c.beta_initial = c.beta_mean;
  else throw ConfigError("beta_initial", "required");
  if (doc.contains("beta_quadratic_max"))
    c.beta_quadratic_max = numbers(doc["beta_quadratic_max"], "beta_quadratic_max");

  if (doc.contains("tau_shape"))
    c.tau_shape = wrap("tau_shape", [&] { return parse_shape(text(doc["tau_shape"], "tau_shape")); });
  if (doc.contains("tau_mean")) c.tau_mean = number(doc["tau_mean"], "tau_mean");
  if (doc.contains("tau_initial")) c.tau_initial = number(doc["tau_initial"], "tau_initial");
  else c.tau_initial = c.tau_mean;
  if (doc.contains("tau_quadratic_max"))
    c.tau_quadratic_max = number(doc["tau_quadratic_max"], "tau_quadratic_max");

  if (doc.contains("sigma")) c.sigma = number(doc["sigma"], "sigma");
  if (!(c.sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
  if (doc.contains("rho")) c.rho = number(doc["rho"], "rho");
  if (!(c.rho >= 0.0 && c.rho < 1.0)) throw ConfigError("rho", "must lie in [0,1)");
  if (doc.contains("pow")) c.pow = number(doc["pow"], "pow");
  if (!(c.pow > 0.0 && c.pow < 1.0)) throw ConfigError("pow", "must lie in (0,1)");
  if (doc.contains("sigLev")) c.sigLev = number(doc["sigLev"], "sigLev");
  if (!(c.sigLev > 0.0 && c.sigLev < 1.0)) throw ConfigError("sigLev", "must lie in (0,1)");
  if (c.pow <= c.sigLev) throw ConfigError("pow", "must exceed sigLev");

  if (doc.contains("method"))
    c.method = wrap("method", [&] { return parse_method(text(doc["method"], "method")); });
  if (doc.contains("test"))
    c.test = wrap("test", [&] { return parse_variant(text(doc["test"], "test")); });
  if (doc.contains("result"))
    c.result = wrap("result", [&] { return parse_result(text(doc["result"], "result")); });
  if (doc.contains("SS") && !doc["SS"].is_null()) c.SS = positive_int(doc["SS"], "SS");
  if (c.result != ResultKind::SampleSize && !c.SS)
    throw ConfigError("SS", "required when result is " + std::string(to_string(c.result)));

  if (doc.contains("q") && !doc["q"].is_null()) {
    c.q = positive_int(doc["q"], "q");
    if (*c.q > 4) throw ConfigError("q", "intercept dimension above 4 is not supported");
  }
  if (doc.contains("alpha")) {
    c.alpha = numbers(doc["alpha"], "alpha");
    if (c.alpha.size() == 1 && c.intercept_dim() > 1)
      c.alpha.assign(c.intercept_dim(), c.alpha[0]);
    if (static_cast<int>(c.alpha.size()) != c.intercept_dim())
      throw ConfigError("alpha", "needs q = " + std::to_string(c.intercept_dim()) + " entries");
  }
  if (doc.contains("replicates")) c.replicates = positive_int(doc["replicates"], "replicates");
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (s.is_number_unsigned()) c.seed = s.get<std::uint64_t>();
    else {
      const long long v = integer(s, "seed");
      if (v < 0) throw ConfigError("seed", "must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    }
  }
  if (doc.contains("threads")) c.threads = positive_int(doc["threads"], "threads");
  if (doc.contains("max_n")) c.max_n = positive_int(doc["max_n"], "max_n");
  return c;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const RunConfig& c) {
  json j;
  j["days"] = c.days;
  j["occ_per_day"] = c.occ_per_day;
  j["aa_day_aa"] = c.aa_day_aa;
  if (c.prob.control) {
    j["prob"] = {{"control", *c.prob.control}};
  } else {
    j["prob"] = {{"levels", c.prob.levels}, {"rows", c.prob.rows}};
  }
  j["beta_shape"] = std::string(to_string(c.beta_shape));
  j["beta_mean"] = c.beta_mean;
  j["beta_initial"] = c.beta_initial;
  if (!c.beta_quadratic_max.empty()) j["beta_quadratic_max"] = c.beta_quadratic_max;
  j["tau_shape"] = std::string(to_string(c.tau_shape));
  j["tau_mean"] = c.tau_mean;
  j["tau_initial"] = c.tau_initial;
  j["tau_quadratic_max"] = c.tau_quadratic_max;
  j["sigma"] = c.sigma;
  j["rho"] = c.rho;
  j["pow"] = c.pow;
  j["sigLev"] = c.sigLev;
  j["method"] = std::string(to_string(c.method));
  j["test"] = std::string(to_string(c.test));
  j["result"] = std::string(to_string(c.result));
  if (c.SS) j["SS"] = *c.SS;
  j["q"] = c.intercept_dim();
  if (!c.alpha.empty()) j["alpha"] = c.alpha;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["max_n"] = c.max_n;
  return j;
}

ResolvedConfig resolve(const RunConfig& c) {
  ResolvedConfig rc;
  const std::size_t m = c.aa_day_aa.size();
  AvailabilityPattern avail{c.tau_shape, c.tau_mean, c.tau_initial, c.tau_quadratic_max};

  if (c.prob.control) {
    std::vector<LevelAddition> adds;
    for (int d : c.aa_day_aa) {
      if (!adds.empty() && adds.back().day == d) ++adds.back().count;
      else adds.push_back({1, d});
    }
    rc.design = wrap("prob", [&] {
      return build_uniform_design(c.days, c.occ_per_day, *c.prob.control, adds, avail);
    });
  } else {
    if (c.prob.levels.size() != m + 1)
      throw ConfigError("prob.levels", "expected " + std::to_string(m + 1) +
                                           " columns (control plus one per entry of aa_day_aa)");
    const std::size_t n_tp = static_cast<std::size_t>(c.days) * c.occ_per_day;
    if (c.prob.rows.size() != n_tp)
      throw ConfigError("prob.rows", "expected " + std::to_string(n_tp) +
                                         " rows (days x occ_per_day), got " +
                                         std::to_string(c.prob.rows.size()));
    DesignSpec d;
    d.days = c.days;
    d.occasions_per_day = c.occ_per_day;
    d.addition_day = c.aa_day_aa;
    d.prob.resize(static_cast<Eigen::Index>(n_tp), static_cast<Eigen::Index>(m + 1));
    for (std::size_t r = 0; r < n_tp; ++r)
      for (std::size_t j = 0; j <= m; ++j) d.prob(r, j) = c.prob.rows[r][j];
    d.availability = wrap("tau_mean", [&] {
      return generate_availability(avail, c.days, c.occ_per_day);
    });
    const auto violations = validate(d);
    if (!violations.empty()) {
      const Violation& v = violations.front();
      std::string path = "prob";
      if (v.day > 0) {
        path = idx("prob.rows", static_cast<std::size_t>((v.day - 1) * c.occ_per_day + v.occasion - 1));
        if (v.level >= 0) path = idx(path, v.level);
      }
      std::string msg = v.message;
      if (violations.size() > 1)
        msg += " (" + std::to_string(violations.size() - 1) + " more violations)";
      throw ConfigError(path, msg);
    }
    rc.design = std::move(d);
  }

  rc.trend.shape = c.beta_shape;
  rc.trend.mean = per_level(c.beta_mean, m, "beta_mean");
  rc.trend.initial = per_level(c.beta_initial, m, "beta_initial");
  if (!c.beta_quadratic_max.empty()) {
    rc.trend.plateau_day = per_level(c.beta_quadratic_max, m, "beta_quadratic_max");
  } else {
    for (int d : c.aa_day_aa) rc.trend.plateau_day.push_back(d - 1 + 28.0);
  }
  wrap("beta_mean", [&] { return solve_coefficients(rc.trend, rc.design); });
  rc.q = c.intercept_dim();
  return rc;
}

SimulationPlan make_plan(const RunConfig& c, const ResolvedConfig& rc, int n) {
  SimulationPlan p;
  p.design = rc.design;
  p.trend = rc.trend;
  p.q = rc.q;
  if (!c.alpha.empty()) p.intercept = Eigen::Map<const Eigen::VectorXd>(c.alpha.data(), c.alpha.size());
  p.sigma = c.sigma;
  p.rho = c.rho;
  p.n = n;
  p.replicates = c.replicates;
  p.seed = c.seed;
  p.variant = c.test;
  p.alpha = c.sigLev;
  p.mode = c.method;
  p.threads = c.threads;
  return p;
}

RunConfig demo_config() {
  RunConfig c;
  c.days = 180;
  c.occ_per_day = 1;
  c.aa_day_aa = {1, 1, 91, 91};
  c.prob.control = 0.6;
  c.beta_shape = Shape::LinearConstant;
  c.beta_mean.assign(4, 0.2);
  c.beta_initial.assign(4, 0.02);
  for (int d : c.aa_day_aa) c.beta_quadratic_max.push_back(d - 1 + 28.0);
  c.method = Method::Power;
  c.test = TestVariant::HotellingN;
  c.result = ResultKind::SampleSize;
  return c;
}

}  // namespace mlmrt
