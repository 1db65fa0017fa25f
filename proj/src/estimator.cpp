#include "mlmrt/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "mlmrt/error.hpp"
#include "mlmrt/kernels.hpp"

namespace mlmrt {

namespace {

const char* const kHeader = "participant,day,occasion,available,level,outcome";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void csv_error(long line, const std::string& msg) {
  throw Error(ErrorKind::CsvSchema, "line " + std::to_string(line) + ": " + msg);
}

int parse_int(std::string_view s, long line, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    csv_error(line, std::string(field) + " is not an integer: \"" + std::string(s) + "\"");
  return v;
}

bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

std::string column_name(int q, int p, int c) {
  if (c < q) return "alpha[" + std::to_string(c) + "]";
  const int e = c - q;
  return "beta[" + std::to_string(e / p + 1) + "][" + std::to_string(e % p) + "]";
}

double quad_form(const Eigen::MatrixXd& cov, const Eigen::VectorXd& v, bool& ok) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
       ldlt.vectorD().minCoeff() > 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff());
  if (!ok) return 0.0;
  return v.dot(ldlt.solve(v));
}

}  // namespace

TrialDataset read_csv(std::istream& in, const DesignSpec& design) {
  TrialDataset out;
  out.design = design;
  std::string line;
  long lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (!header) {
      std::string compact;
      for (char ch : sv)
        if (ch != ' ' && ch != '\t') compact += ch;
      if (compact != kHeader)
        csv_error(lineno, "expected header \"" + std::string(kHeader) + "\"");
      header = true;
      continue;
    }
    std::string_view fields[6];
    int nf = 0;
    while (true) {
      const auto comma = sv.find(',');
      if (nf == 6) csv_error(lineno, "expected 6 fields, found more");
      fields[nf++] = trim(sv.substr(0, comma));
      if (comma == std::string_view::npos) break;
      sv.remove_prefix(comma + 1);
    }
    if (nf != 6) csv_error(lineno, "expected 6 fields, found " + std::to_string(nf));

    Record r;
    r.participant = parse_int(fields[0], lineno, "participant");
    r.day = parse_int(fields[1], lineno, "day");
    r.occasion = parse_int(fields[2], lineno, "occasion");
    const std::string_view av = fields[3];
    if (av == "1" || av == "true" || av == "TRUE") r.available = true;
    else if (av == "0" || av == "false" || av == "FALSE") r.available = false;
    else csv_error(lineno, "available must be 0 or 1, got \"" + std::string(av) + "\"");
    r.level = parse_int(fields[4], lineno, "level");
    if (is_missing(fields[5])) {
      r.available = false;
      r.outcome = 0.0;
    } else {
      const auto [ptr, ec] =
          std::from_chars(fields[5].data(), fields[5].data() + fields[5].size(), r.outcome);
      if (ec != std::errc() || ptr != fields[5].data() + fields[5].size() ||
          !std::isfinite(r.outcome))
        csv_error(lineno, "outcome is not a number: \"" + std::string(fields[5]) + "\"");
    }
    if (r.day < 1 || r.day > design.days)
      csv_error(lineno, "day " + std::to_string(r.day) + " outside [1, " +
                            std::to_string(design.days) + "]");
    if (r.occasion < 1 || r.occasion > design.occasions_per_day)
      csv_error(lineno, "occasion " + std::to_string(r.occasion) + " outside [1, " +
                            std::to_string(design.occasions_per_day) + "]");
    if (r.level < 0 || r.level > design.levels())
      csv_error(lineno, "level " + std::to_string(r.level) + " outside [0, " +
                            std::to_string(design.levels()) + "]");
    out.records.push_back(r);
  }
  if (!header) throw Error(ErrorKind::CsvSchema, "line 1: empty CSV, missing header");
  if (out.records.empty()) throw Error(ErrorKind::CsvSchema, "CSV has a header but no records");
  return out;
}

void write_csv(std::ostream& out, const TrialDataset& data) {
  out << kHeader << '\n';
  char buf[64];
  for (const auto& r : data.records) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.outcome);
    out << r.participant << ',' << r.day << ',' << r.occasion << ',' << (r.available ? 1 : 0)
        << ',' << r.level << ',' << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

void model_row(const DesignSpec& design, const EffectTrend& trend, int q, int tp, int level,
               double* out) {
  const int p = trend.p();
  intercept_row(q, design.elapsed_at(tp), std::span<double>(out, q));
  double z[3];
  for (int m = 1; m <= design.levels(); ++m) {
    const double c = (level == m ? 1.0 : 0.0) - design.pi(tp, m);
    double* dst = out + q + (m - 1) * p;
    if (c == 0.0) {
      std::fill(dst, dst + p, 0.0);
      continue;
    }
    z_basis(trend, m, design.day_of(tp), design.occasion_of(tp), design.occasions_per_day,
            std::span<double>(z, p));
    for (int j = 0; j < p; ++j) dst[j] = c * z[j];
  }
}

ModelMatrix build_design_matrix(const TrialDataset& data, const EffectTrend& trend, int q) {
  const DesignSpec& design = data.design;
  check_trend(trend, design);
  if (q < 1) throw Error(ErrorKind::InvalidConfig, "intercept dimension q must be >= 1");
  ModelMatrix mm;
  mm.q = q;
  mm.p = trend.p();
  mm.levels = design.levels();
  const int k = mm.k();
  for (int c = 0; c < k; ++c) mm.columns.push_back(column_name(q, mm.p, c));

  std::map<int, std::vector<const Record*>> by_id;
  for (const auto& r : data.records) by_id[r.participant].push_back(&r);

  const int n_tp = design.time_points();
  for (auto& [id, recs] : by_id) {
    std::vector<const Record*> rows;
    std::vector<char> seen(n_tp, 0);
    for (const Record* r : recs) {
      if (r->day < 1 || r->day > design.days || r->occasion < 1 ||
          r->occasion > design.occasions_per_day)
        throw Error(ErrorKind::CsvSchema, "participant " + std::to_string(id) +
                                              ": time point outside the design");
      const int tp = (r->day - 1) * design.occasions_per_day + (r->occasion - 1);
      if (seen[tp])
        throw Error(ErrorKind::CsvSchema, "participant " + std::to_string(id) +
                                              " has two records for day " +
                                              std::to_string(r->day) + " occasion " +
                                              std::to_string(r->occasion));
      seen[tp] = 1;
      if (!r->available) continue;
      if (r->level < 0 || r->level > design.levels() ||
          (r->level > 0 && design.pi(tp, r->level) <= 0.0))
        throw Error(ErrorKind::LevelMismatch,
                    "participant " + std::to_string(id) + " assigned level " +
                        std::to_string(r->level) + " on day " + std::to_string(r->day) +
                        ", when it is not available");
      rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(), [](const Record* a, const Record* b) {
      return a->day != b->day ? a->day < b->day : a->occasion < b->occasion;
    });
    ParticipantRows pr;
    pr.id = id;
    pr.x.resize(static_cast<Eigen::Index>(rows.size()), k);
    pr.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Record* r = rows[i];
      const int tp = (r->day - 1) * design.occasions_per_day + (r->occasion - 1);
      pr.time_points.push_back(tp);
      model_row(design, trend, q, tp, r->level, pr.x.row(static_cast<Eigen::Index>(i)).data());
      pr.y(static_cast<Eigen::Index>(i)) = r->outcome;
    }
    mm.participants.push_back(std::move(pr));
  }
  return mm;
}

FitResult fit(const ModelMatrix& mm) {
  const int k = mm.k();
  const int q = mm.q;
  const int mp = mm.mp();
  const int n = static_cast<int>(mm.participants.size());
  if (n < 2) throw Error(ErrorKind::RankDeficient, "need at least two participants");

  std::vector<RowMatrix> grams(n);
  RowMatrix a = RowMatrix::Zero(k, k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  long total_rows = 0;
  for (int i = 0; i < n; ++i) {
    const auto& pr = mm.participants[i];
    grams[i] = RowMatrix::Zero(k, k);
    kernels::accumulate_gram(pr.x.data(), pr.x.rows(), k, nullptr, grams[i].data());
    kernels::accumulate_xty(pr.x.data(), pr.x.rows(), k, nullptr, pr.y.data(), b.data());
    a += grams[i];
    total_rows += pr.x.rows();
  }

  Eigen::MatrixXd am = a;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(am);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (int c = static_cast<int>(qr.rank()); c < k; ++c) {
      if (!names.empty()) names += ", ";
      names += mm.columns[perm(c)];
    }
    throw Error(ErrorKind::RankDeficient,
                "design is rank deficient (" + std::to_string(qr.rank()) + " of " +
                    std::to_string(k) + "); unidentifiable: " + names);
  }

  FitResult f;
  f.n = n;
  f.q = q;
  f.mp = mp;
  f.columns = mm.columns;
  f.theta = qr.solve(b);
  f.alpha = f.theta.head(q);
  f.beta = f.theta.tail(mp);
  const Eigen::MatrixXd a_inv = qr.inverse();

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd meat_small = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::VectorXd> scores(n);
  double sse = 0.0;
  f.residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& pr = mm.participants[i];
    f.residuals[i] = pr.y - pr.x * f.theta;
    sse += f.residuals[i].squaredNorm();
    scores[i] = pr.x.transpose() * f.residuals[i];
    meat.noalias() += scores[i] * scores[i].transpose();
  }
  f.sigma_hat = total_rows > 0 ? std::sqrt(sse / total_rows) : 0.0;
  const double dn = n;
  f.cov_plugin = dn * a_inv * meat * a_inv;
  f.cov_plugin = 0.5 * (f.cov_plugin + f.cov_plugin.transpose()).eval();

  // Leverage-corrected scores X_iᵀ(I - H_i)⁻¹e_i = u_i + G_i (A - G_i)⁻¹ u_i.
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd g = grams[i];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(am - g);
    lu.setThreshold(1e-10);
    if (lu.rank() < k)
      throw Error(ErrorKind::SingularLeverage,
                  "leverage correction undefined: participant " +
                      std::to_string(mm.participants[i].id) +
                      " alone identifies part of the model");
    const Eigen::VectorXd v = scores[i] + g * lu.solve(scores[i]);
    meat_small.noalias() += v * v.transpose();
  }
  Eigen::MatrixXd full_small = dn * a_inv * meat_small * a_inv;
  f.cov_beta_small = full_small.bottomRightCorner(mp, mp);
  f.cov_beta_small = 0.5 * (f.cov_beta_small + f.cov_beta_small.transpose()).eval();
  f.cov_beta_model = f.sigma_hat * f.sigma_hat * dn * a_inv.bottomRightCorner(mp, mp);
  f.cov_beta_model = 0.5 * (f.cov_beta_model + f.cov_beta_model.transpose()).eval();

  bool ok_small = false, ok_model = false;
  f.statistic = dn * quad_form(f.cov_beta_small, f.beta, ok_small);
  f.statistic_model = dn * quad_form(f.cov_beta_model, f.beta, ok_model);
  f.covariance_singular = !ok_small || !ok_model;
  if (f.covariance_singular) {
    f.statistic = std::numeric_limits<double>::quiet_NaN();
    f.statistic_model = f.statistic;
  }
  return f;
}

FitResult fit(const TrialDataset& data, const EffectTrend& trend, int q) {
  FitResult f = fit(build_design_matrix(data, trend, q));
  summarize_levels(f, data.design, trend);
  return f;
}

void summarize_levels(FitResult& f, const DesignSpec& design, const EffectTrend& trend) {
  const int p = trend.p();
  const int n_tp = design.time_points();
  f.levels.clear();
  std::vector<double> z(p);
  for (int m = 1; m <= design.levels(); ++m) {
    const int first = design.first_time_point(m);
    Eigen::VectorXd g0(p), gbar = Eigen::VectorXd::Zero(p);
    z_basis(trend, m, design.day_of(first), design.occasion_of(first), design.occasions_per_day,
            z);
    for (int j = 0; j < p; ++j) g0(j) = z[j];
    for (int tp = first; tp < n_tp; ++tp) {
      z_basis(trend, m, design.day_of(tp), design.occasion_of(tp), design.occasions_per_day, z);
      for (int j = 0; j < p; ++j) gbar(j) += z[j];
    }
    gbar /= static_cast<double>(n_tp - first);
    const Eigen::VectorXd bm = f.beta.segment((m - 1) * p, p);
    const Eigen::MatrixXd s = f.cov_beta_small.block((m - 1) * p, (m - 1) * p, p, p);
    LevelSummary ls;
    ls.level = m;
    ls.initial = g0.dot(bm);
    ls.average = gbar.dot(bm);
    ls.initial_se = std::sqrt(std::max(0.0, g0.dot(s * g0)) / f.n);
    ls.average_se = std::sqrt(std::max(0.0, gbar.dot(s * gbar)) / f.n);
    ls.standardized_average = f.sigma_hat > 0.0 ? ls.average / f.sigma_hat : 0.0;
    f.levels.push_back(ls);
  }
}

double wald_distance(const FitResult& f, const Eigen::VectorXd& beta, TestVariant variant) {
  const Eigen::VectorXd d = f.beta - beta;
  bool ok = false;
  const double v = f.n * quad_form(variant == TestVariant::Chi ? f.cov_beta_model
                                                               : f.cov_beta_small,
                                   d, ok);
  if (!ok) throw Error(ErrorKind::RankDeficient, "estimated covariance of beta is singular");
  return v;
}

TestResult test(const FitResult& f, TestVariant variant, double alpha) {
  if (f.covariance_singular)
    throw Error(ErrorKind::RankDeficient, "estimated covariance of beta is singular");
  const Reference ref = reference(variant, f.mp, f.n, f.q);
  TestResult t;
  t.variant = variant;
  t.statistic = variant == TestVariant::Chi ? f.statistic_model : f.statistic;
  t.df1 = ref.df1;
  t.df2 = ref.df2;
  t.p_value = ref.sf(t.statistic);
  t.reject = t.p_value < alpha;
  return t;
}

}  // namespace mlmrt
