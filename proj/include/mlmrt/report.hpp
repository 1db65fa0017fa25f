#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mlmrt/config.hpp"
#include "mlmrt/error.hpp"

namespace mlmrt {

const char* engine_version();

// 0 ok, 2 config/data, 3 infeasible.
int exit_code(ErrorKind kind);

// Every report is a flat object: result fields at top level plus "sentence",
// "config" (the parsed config with defaults filled in) and "version".
json sizing_report(const RunConfig& cfg);

// Monte Carlo estimate at `n`, or at SS, or at the computed sample size.
json simulation_report(const RunConfig& cfg, std::optional<int> n = std::nullopt);

// Power (or coverage, for the precision method) for N in [nmin, nmax]; nmin
// is raised to the variant's search floor.
json power_curve_report(const RunConfig& cfg, int nmin, int nmax);

// Fits the working model to a CSV laid out on the config's design and
// tests β = 0 with the config's variant and significance level. With a
// follow-up config, the estimated standardized effects replace its
// beta_mean/beta_initial and a sizing report is attached under "followup".
json analysis_report(std::istream& csv, const RunConfig& design_cfg,
                     const std::optional<RunConfig>& followup = std::nullopt);

// RunConfig with its effect targets replaced by the fit's standardized
// estimates.
RunConfig chain_followup(const RunConfig& followup, const json& analysis);

json error_json(const Error& e);

}  // namespace mlmrt
