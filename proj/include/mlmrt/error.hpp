#pragma once

#include <stdexcept>
#include <string>

namespace mlmrt {

enum class ErrorKind {
  InvalidProbability,
  InvalidSchedule,
  InvalidDesign,
  DegenerateTrend,
  NonConvergence,
  InsufficientN,
  SingularQ,
  NoSolution,
  LevelMismatch,
  RankDeficient,
  SingularLeverage,
  InvalidConfig,
  CsvSchema,
  SimulationFailed,
};

const char* to_string(ErrorKind kind);

// All library failures derive from this; `kind` drives CLI exit codes and
// HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Config validation failure carrying the JSON path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(ErrorKind::InvalidConfig, path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mlmrt
