#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riskalloc/distribution.hpp"
#include "riskalloc/envelope.hpp"
#include "riskalloc/kernel.hpp"
#include "riskalloc/monotone_fn.hpp"

namespace riskalloc {

struct AgentSpec {
  DistortionKernel kernel;
  double weight = 1.0;
};

// Agents plus a nonnegative total loss X0.
class MarketProblem {
 public:
  MarketProblem(std::vector<AgentSpec> agents, LossDistribution total);

  const std::vector<AgentSpec>& agents() const noexcept { return agents_; }
  const LossDistribution& total() const noexcept { return total_; }
  std::size_t size() const noexcept { return agents_.size(); }

 private:
  std::vector<AgentSpec> agents_;
  LossDistribution total_;
};

// Ψ(t) = min_i λ_i (1 - Φ_i(t)), evaluated directly.
double psi(std::span<const AgentSpec> agents, double t);

// Ψ as affine pieces on [0, 1); Ψ(1) = 0.
class PsiCurve {
 public:
  explicit PsiCurve(std::span<const AgentSpec> agents);
  double operator()(double t) const;
  double left_limit(double t) const;
  const std::vector<AffinePiece>& pieces() const noexcept { return pieces_; }

 private:
  std::vector<AffinePiece> pieces_;
};

enum class TieBreak { lowest, highest };

struct SelectorPiece {
  double start;
  double end;
  std::size_t winner;
  std::vector<std::size_t> tied;  // empty unless >= 2 agents attain Ψ on the whole piece
  bool operator==(const SelectorPiece&) const = default;
};

struct TieRegion {
  double start;
  double end;
  std::vector<std::size_t> agents;
};

// The bang-bang rule k*: pieces partition [0, 1) and carry one winner each.
class LevelSelector {
 public:
  explicit LevelSelector(std::vector<SelectorPiece> pieces) : pieces_(std::move(pieces)) {}

  const std::vector<SelectorPiece>& pieces() const noexcept { return pieces_; }
  // Winner on the piece containing t; level 1 belongs to the last piece.
  std::size_t winner_at(double t) const;
  std::vector<TieRegion> tie_regions() const;

  bool operator==(const LevelSelector&) const = default;

 private:
  std::vector<SelectorPiece> pieces_;
};

LevelSelector optimal_selector(std::span<const AgentSpec> agents, TieBreak tie_break = TieBreak::lowest);

// Right-continuous step function on [0, inf): values[c] on [starts[c], starts[c+1]).
struct StepFn {
  std::vector<double> starts;
  std::vector<double> values;
  double operator()(double x) const;
};

struct ComonotoneAllocation {
  std::vector<PiecewiseMonotoneFn> components;  // f_i
  std::vector<StepFn> marginals;                // h_i
};

// Builds f_i(x) = ∫_0^x h_i from per-cell shares. Cell c is
// [starts[c], starts[c+1]) and the last cell is unbounded; starts[0] = 0.
// shares[c][i] is agent i's share of the marginal loss in cell c.
ComonotoneAllocation allocation_from_cells(std::span<const double> starts,
                                           std::span<const std::vector<double>> shares);

// h_i*(s) = k_i*(F(s)), f_i*(x) = ∫_0^x h_i*.
ComonotoneAllocation optimal_allocation(const MarketProblem& problem, TieBreak tie_break = TieBreak::lowest);

// ∫_0^inf Ψ(F(s)) ds.
double optimal_value(const MarketProblem& problem);

struct AllocationEvaluation {
  double value;
  std::vector<double> risks;  // unweighted ρ_i(f_i(X0))
};

// Σ λ_i ρ_i(f_i(X0)) via pushforward and the quantile form.
AllocationEvaluation evaluate_allocation_detail(const MarketProblem& problem, const ComonotoneAllocation& alloc);
double evaluate_allocation(const MarketProblem& problem, const ComonotoneAllocation& alloc);

// Checks Σ f_i = id and the component invariants; throws ValidationError.
void validate_allocation(const ComonotoneAllocation& alloc, std::size_t agents, double tol = 1e-9);

// max_i Φ_i; requires equal weights.
DistortionKernel convolution_kernel(std::span<const AgentSpec> agents);

struct RegularityReport {
  std::vector<double> levels;
  std::vector<double> gaps;  // |ρ(X ∧ m) - ρ(X)|
  bool passed;
};

RegularityReport regularity_check(const DistortionKernel& kernel, const LossDistribution& total,
                                  std::span<const double> levels, double threshold = 1e-6);

}  // namespace riskalloc
