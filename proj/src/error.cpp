#include "mlmrt/error.hpp"

namespace mlmrt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ErrorKind::InvalidDesign: return "InvalidDesign";
    case ErrorKind::DegenerateTrend: return "DegenerateTrend";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InsufficientN: return "InsufficientN";
    case ErrorKind::SingularQ: return "SingularQ";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::LevelMismatch: return "LevelMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularLeverage: return "SingularLeverage";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CsvSchema: return "CsvSchema";
    case ErrorKind::SimulationFailed: return "SimulationFailed";
  }
  return "Unknown";
}

}  // namespace mlmrt
