#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlmrt {

// Time shapes shared by proximal-effect trends and availability patterns.
enum class Shape { Constant, Linear, LinearConstant, Quadratic };

int basis_dimension(Shape shape);
std::string_view to_string(Shape shape);
// Accepts the R-style names ("constant", "linear", "linear and constant",
// "quadratic") plus "spline" / "linear-then-constant" aliases.
Shape parse_shape(std::string_view name);

// Elapsed time in days at (day, occasion): ((d-1)T + t - 1) / T.
inline double elapsed(int day, int occasion, int occasions_per_day) {
  return (static_cast<double>(day - 1) * occasions_per_day + (occasion - 1)) /
         occasions_per_day;
}

// Writes the shape's basis row at elapsed time s. `turn` is the elapsed time
// of the plateau (spline) and is ignored by the other shapes.
void basis_row(Shape shape, double s, double turn, std::span<double> out);

// Intercept basis (1, s, ..., s^{q-1}).
void intercept_row(int q, double s, std::span<double> out);

// Coefficients c with basis(s_start)·c = initial and mean over `window` of
// basis(s)·c = mean; quadratic adds a zero derivative at `turn`.
// Throws DegenerateTrend when the constraints do not pin c down.
std::vector<double> solve_shape(Shape shape, double turn, double s_start,
                                std::span<const double> window, double initial,
                                double mean);

}  // namespace mlmrt
