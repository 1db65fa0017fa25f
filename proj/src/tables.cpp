#include "mlmrt/tables.hpp"

#include <cctype>
#include <cstdio>
#include <ostream>

#include "mlmrt/error.hpp"

namespace mlmrt {

namespace {

constexpr TestVariant kVariants[] = {TestVariant::Chi, TestVariant::HotellingN,
                                     TestVariant::HotellingN1, TestVariant::HotellingNq1};
constexpr int kLevels[] = {3, 4};
constexpr int kDays[] = {180, 84, 28, 14};

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<std::string> table_ids() { return {"1", "2", "3", "4", "C5", "C6", "C7", "C8"}; }

TableSpec table_spec(std::string_view id) {
  std::string key(id);
  if (!key.empty()) key[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(key[0])));
  TableSpec s;
  s.id = key;
  if (key == "1" || key == "3") {
    s.shape = Shape::LinearConstant;
    s.method = Method::Power;
    s.targets = {0.2, 0.1};
  } else if (key == "2" || key == "4") {
    s.shape = Shape::LinearConstant;
    s.method = Method::Precision;
    s.targets = {0.25, 0.15};
  } else if (key == "C5" || key == "C7") {
    s.shape = Shape::Constant;
    s.method = Method::Power;
    s.targets = {0.2, 0.1};
  } else if (key == "C6" || key == "C8") {
    s.shape = Shape::Constant;
    s.method = Method::Precision;
    s.targets = {0.2, 0.1};
  } else {
    throw Error(ErrorKind::InvalidConfig,
                "unknown table \"" + std::string(id) + "\" (expected 1-4 or C5-C8)");
  }
  s.additions = key == "3" || key == "4" || key == "C7" || key == "C8";
  s.q = basis_dimension(s.shape);
  return s;
}

DesignSpec table_design(int levels, int days, bool additions, double control) {
  std::vector<LevelAddition> adds;
  if (additions && levels > 2) adds = {{2, 1}, {levels - 2, days / 2 + 1}};
  else adds = {{levels, 1}};
  return build_uniform_design(days, 1, control, adds);
}

EffectTrend table_trend(Shape shape, const DesignSpec& design, double mean, double initial) {
  return uniform_trend(shape, design.addition_day, initial, mean);
}

std::vector<TableRow> compute_table(const TableSpec& spec) {
  std::vector<TableRow> rows;
  for (int m : kLevels) {
    for (TestVariant v : kVariants) {
      for (int d : kDays) {
        TableRow row;
        row.variant = v;
        row.levels = m;
        row.days = d;
        const DesignSpec design = table_design(m, d, spec.additions);
        for (int c = 0; c < 2; ++c) {
          const PowerModel model(design, table_trend(spec.shape, design, spec.targets[c]), spec.q);
          const SizingResult r = spec.method == Method::Power
                                     ? model.sample_size_power(0.05, 0.8, v)
                                     : model.sample_size_precision(0.05, v);
          row.cells[c].n = r.n;
          row.cells[c].value = r.value;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

SimulationPlan table_plan(const TableSpec& spec, const TableRow& row, int column,
                          const McSettings& mc) {
  SimulationPlan p;
  p.design = table_design(row.levels, row.days, spec.additions);
  p.trend = table_trend(spec.shape, p.design, spec.targets[column]);
  p.q = spec.q;
  p.n = row.cells[column].n;
  p.replicates = mc.replicates;
  p.seed = mc.seed;
  p.threads = mc.threads;
  p.variant = row.variant;
  p.alpha = 0.05;
  p.mode = spec.method;
  return p;
}

void add_monte_carlo(const TableSpec& spec, std::vector<TableRow>& rows, const McSettings& mc) {
  for (auto& row : rows)
    for (int c = 0; c < 2; ++c) row.cells[c].mc = run_simulation(table_plan(spec, row, c, mc));
}

void write_table_csv(std::ostream& out, const TableSpec& spec, const std::vector<TableRow>& rows) {
  const char* value = spec.method == Method::Power ? "P" : "CP";
  const bool mc = !rows.empty() && rows.front().cells[0].mc.has_value();
  out << "test,M,D";
  for (int c = 0; c < 2; ++c) out << ",N_" << fixed(spec.targets[c], 2);
  for (int c = 0; c < 2; ++c) out << ',' << value << '_' << fixed(spec.targets[c], 2);
  if (mc)
    for (int c = 0; c < 2; ++c) out << ",MC_" << value << '_' << fixed(spec.targets[c], 2);
  out << '\n';
  for (const auto& r : rows) {
    out << to_string(r.variant) << ',' << r.levels << ',' << r.days;
    for (int c = 0; c < 2; ++c) out << ',' << r.cells[c].n;
    for (int c = 0; c < 2; ++c) out << ',' << fixed(r.cells[c].value, 2);
    if (mc)
      for (int c = 0; c < 2; ++c) out << ',' << fixed(r.cells[c].mc->estimate, 2);
    out << '\n';
  }
}

std::vector<int> level_sweep(TestVariant v, int max_levels) {
  std::vector<int> out;
  for (int m = 1; m <= max_levels; ++m) {
    const DesignSpec design = build_uniform_design(180, 1, 1.0 / (m + 1), {{m, 1}});
    const PowerModel model(design, table_trend(Shape::LinearConstant, design, 0.2), 2);
    out.push_back(model.sample_size_power(0.05, 0.8, v).n);
  }
  return out;
}

}  // namespace mlmrt
