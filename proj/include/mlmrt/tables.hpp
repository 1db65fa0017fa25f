#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlmrt/power.hpp"
#include "mlmrt/simulation.hpp"

namespace mlmrt {

// One of the published sizing tables: rows M ∈ {3,4} × test variant × D ∈
// {180, 84, 28, 14}, two effect (or precision) columns, initial value 0.02.
struct TableSpec {
  std::string id;
  Shape shape = Shape::LinearConstant;
  Method method = Method::Power;
  bool additions = false;  // M-2 levels join on day floor(D/2)+1
  std::array<double, 2> targets{};
  int q = 2;
};

std::vector<std::string> table_ids();
// Accepts "1".."4" and "C5".."C8" (case-insensitive "c").
TableSpec table_spec(std::string_view id);

struct TableCell {
  int n = 0;
  double value = 0.0;
  std::optional<McEstimate> mc;
};

struct TableRow {
  TestVariant variant = TestVariant::Chi;
  int levels = 3;
  int days = 180;
  std::array<TableCell, 2> cells;
};

DesignSpec table_design(int levels, int days, bool additions, double control = 0.6);
EffectTrend table_trend(Shape shape, const DesignSpec& design, double mean, double initial = 0.02);

std::vector<TableRow> compute_table(const TableSpec& spec);

struct McSettings {
  int replicates = 1000;
  std::uint64_t seed = 20240501;
  int threads = 1;
};

SimulationPlan table_plan(const TableSpec& spec, const TableRow& row, int column,
                          const McSettings& mc);
void add_monte_carlo(const TableSpec& spec, std::vector<TableRow>& rows, const McSettings& mc);

void write_table_csv(std::ostream& out, const TableSpec& spec, const std::vector<TableRow>& rows);

// Power-based N for M = 1..max_levels at D = 180, spline effects (initial
// 0.02, mean 0.2), with every arm including control at probability 1/(M+1).
std::vector<int> level_sweep(TestVariant v, int max_levels = 10);

}  // namespace mlmrt
