#pragma once

#include <cstddef>
#include <vector>

namespace riskalloc {

enum class RowSense { less_equal, equal, greater_equal };

// maximize c'x subject to rows (a'x sense b) and x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  struct Row {
    std::vector<double> coeffs;
    RowSense sense;
    double rhs;
  };
  std::vector<Row> rows;

  void add_row(std::vector<double> coeffs, RowSense sense, double rhs) {
    rows.push_back({std::move(coeffs), sense, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status;
  std::vector<double> x;   // optimal point, or the phase-one minimizer when infeasible
  double objective = 0.0;
  double infeasibility = 0.0;  // phase-one residual (sum of artificials)
};

// Dense two-phase tableau simplex with Bland's rule; exact enough for the
// small (<= a few hundred rows, <= 12 columns) problems used here.
LpResult solve(const LinearProgram& lp, double tol = 1e-11);

}  // namespace riskalloc
