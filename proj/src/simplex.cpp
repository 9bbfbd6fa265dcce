#include "riskalloc/simplex.hpp"

#include <cmath>
#include <limits>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : cols_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  std::size_t rows() const { return basis_.size(); }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  // Row `rows()` holds the reduced costs (maximisation: enter on positive).
  double& cost(std::size_t c) { return at(rows(), c); }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
    }
    basis_[r] = c;
  }

  // Bland's rule over columns [0, limit). Returns false when unbounded.
  bool optimize(std::size_t limit, double tol) {
    for (;;) {
      std::size_t enter = limit;
      for (std::size_t c = 0; c < limit; ++c)
        if (cost(c) > tol) {
          enter = c;
          break;
        }
      if (enter == limit) return true;
      std::size_t leave = rows();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows(); ++r) {
        const double a = at(r, enter);
        if (a <= tol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - tol || (std::abs(ratio - best) <= tol && leave < rows() && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == rows()) return false;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult solve(const LinearProgram& lp, double tol) {
  const std::size_t n = lp.objective.size();
  const std::size_t m = lp.rows.size();
  std::size_t slacks = 0;
  std::size_t artificials = 0;
  for (const auto& row : lp.rows) {
    if (row.coeffs.size() != n) throw PreconditionError("LP row width must match the objective");
    const bool flip = row.rhs < 0.0;
    RowSense s = row.sense;
    if (flip && s != RowSense::equal) s = s == RowSense::less_equal ? RowSense::greater_equal : RowSense::less_equal;
    if (s != RowSense::equal) ++slacks;
    if (s != RowSense::less_equal) ++artificials;
  }
  // Columns: structural | slack/surplus | artificial.
  const std::size_t art0 = n + slacks;
  Tableau tab(m, art0 + artificials);
  std::size_t next_slack = n;
  std::size_t next_art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto& row = lp.rows[r];
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    RowSense s = row.sense;
    if (sign < 0.0 && s != RowSense::equal) s = s == RowSense::less_equal ? RowSense::greater_equal : RowSense::less_equal;
    for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = sign * row.coeffs[j];
    tab.rhs(r) = sign * row.rhs;
    if (s == RowSense::less_equal) {
      tab.at(r, next_slack) = 1.0;
      tab.basis()[r] = next_slack++;
    } else {
      if (s == RowSense::greater_equal) tab.at(r, next_slack++) = -1.0;
      tab.at(r, next_art) = 1.0;
      tab.basis()[r] = next_art++;
    }
  }

  LpResult result{LpStatus::optimal, std::vector<double>(n, 0.0), 0.0, 0.0};
  auto extract = [&] {
    std::fill(result.x.begin(), result.x.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r)
      if (tab.basis()[r] < n) result.x[tab.basis()[r]] = tab.rhs(r);
  };

  // Phase one: maximise -Σ artificials.
  if (artificials > 0) {
    for (std::size_t c = 0; c <= tab.cols(); ++c) tab.cost(c) = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      for (std::size_t c = 0; c <= tab.cols(); ++c)
        if (c < art0 || c == tab.cols()) tab.cost(c) += tab.at(r, c);
    }
    tab.optimize(art0, tol);
    result.infeasibility = tab.cost(tab.cols());
    if (result.infeasibility > 1e-9) {
      extract();
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c)
        if (std::abs(tab.at(r, c)) > tol) {
          tab.pivot(r, c);
          break;
        }
    }
  }

  // Phase two on structural and slack columns; artificials are frozen.
  for (std::size_t c = 0; c <= tab.cols(); ++c) tab.cost(c) = c < n ? lp.objective[c] : 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basis()[r];
    const double cb = b < n ? lp.objective[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= tab.cols(); ++c) tab.cost(c) -= cb * tab.at(r, c);
  }
  if (!tab.optimize(art0, tol)) {
    extract();
    result.status = LpStatus::unbounded;
    return result;
  }
  extract();
  result.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.objective += lp.objective[j] * result.x[j];
  return result;
}

}  // namespace riskalloc
