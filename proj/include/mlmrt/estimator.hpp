#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlmrt/design.hpp"
#include "mlmrt/distributions.hpp"
#include "mlmrt/trend.hpp"

namespace mlmrt {

struct Record {
  int participant = 0;
  int day = 1;
  int occasion = 1;
  bool available = true;
  int level = 0;  // 0 = control
  double outcome = 0.0;
};

struct TrialDataset {
  DesignSpec design;
  std::vector<Record> records;
};

// Header: participant,day,occasion,available,level,outcome. Throws CsvSchema
// with the offending line number.
TrialDataset read_csv(std::istream& in, const DesignSpec& design);
void write_csv(std::ostream& out, const TrialDataset& data);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One participant's rows at available, observed time points.
struct ParticipantRows {
  int id = 0;
  std::vector<int> time_points;
  RowMatrix x;
  Eigen::VectorXd y;
};

struct ModelMatrix {
  int q = 1;
  int p = 1;
  int levels = 0;
  std::vector<std::string> columns;  // q + M*p names
  std::vector<ParticipantRows> participants;  // sorted by id

  int k() const { return q + levels * p; }
  int mp() const { return levels * p; }
};

// Writes the working-model row [B | (1{A=1}-π_1)Z_1 | ... ] into out.
void model_row(const DesignSpec& design, const EffectTrend& trend, int q, int tp, int level,
               double* out);

// Unavailable and missing time points contribute no rows. Throws
// LevelMismatch for a level that is not available at its time point and
// CsvSchema for duplicates or out-of-range days.
ModelMatrix build_design_matrix(const TrialDataset& data, const EffectTrend& trend, int q);

struct LevelSummary {
  int level = 0;
  double initial = 0.0;  // β_m at the level's first time point
  double average = 0.0;  // β_m averaged over the level's available window
  double initial_se = 0.0;
  double average_se = 0.0;
  double standardized_average = 0.0;  // average / σ̄
};

struct FitResult {
  int n = 0;  // participants
  int q = 1;
  int mp = 0;
  std::vector<std::string> columns;
  Eigen::VectorXd theta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  // Covariances are per participant: Cov(θ̂) ≈ Σ / N.
  Eigen::MatrixXd cov_plugin;       // sandwich for θ
  Eigen::MatrixXd cov_beta_small;   // leverage-corrected sandwich, β block
  Eigen::MatrixXd cov_beta_model;   // σ̄² (A/N)⁻¹, β block
  double sigma_hat = 0.0;
  // Set when residuals leave no variation (e.g. noiseless data); the
  // statistics are then NaN and `test` throws RankDeficient.
  bool covariance_singular = false;
  double statistic = 0.0;        // N β̂ᵀ Σ̂_small⁻¹ β̂
  double statistic_model = 0.0;  // N β̂ᵀ Σ̂_model⁻¹ β̂
  std::vector<Eigen::VectorXd> residuals;
  std::vector<LevelSummary> levels;
};

// Throws RankDeficient naming unidentifiable columns and SingularLeverage
// naming the participant whose leverage correction is undefined.
FitResult fit(const ModelMatrix& mm);
FitResult fit(const TrialDataset& data, const EffectTrend& trend, int q);

// Fills FitResult::levels using the design's availability windows.
void summarize_levels(FitResult& fit, const DesignSpec& design, const EffectTrend& trend);

struct TestResult {
  TestVariant variant = TestVariant::Chi;
  double statistic = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
  bool reject = false;
};

// The χ² test uses the model-based covariance; the Hotelling variants use the
// leverage-corrected sandwich.
TestResult test(const FitResult& fit, TestVariant variant, double alpha);

// N (β̂-β)ᵀ Σ̂⁻¹ (β̂-β) with the covariance `test` would use for the variant.
double wald_distance(const FitResult& fit, const Eigen::VectorXd& beta, TestVariant variant);

}  // namespace mlmrt
