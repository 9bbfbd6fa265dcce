#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskalloc/allocation.hpp"
#include "riskalloc/distribution.hpp"
#include "riskalloc/kernel.hpp"
#include "riskalloc/monotone_fn.hpp"

namespace riskalloc {

// Cells [boundaries[c], boundaries[c+1]) partitioning [0, ess sup]; the last
// cell also owns everything above. Each cell carries one share per agent.
struct GridAssignment {
  std::vector<double> boundaries;
  std::vector<std::vector<double>> shares;
  ComonotoneAllocation allocation() const;
};

// {0} and every positive atom of a discrete total.
std::vector<double> aligned_cells(const LossDistribution& total);
// k equal-width cells over [0, ess sup].
std::vector<double> uniform_cells(const LossDistribution& total, std::size_t k);

inline constexpr std::size_t kMaxCells = 8;
inline constexpr double kMaxAssignments = 1e6;

struct BruteForceResult {
  GridAssignment best;
  std::vector<std::size_t> owners;  // per cell
  double value;
  std::size_t evaluated;
};

// Exhaustive search over integer cell owners; every candidate is valued by
// pushforward and the quantile form.
BruteForceResult brute_force_comonotone(const MarketProblem& problem, std::span<const double> boundaries);

// Σ over cells of width * (Ψ(F(left)) - Ψ(F(right-))): brute force on these
// cells exceeds the optimum by at most this much.
double grid_gap_bound(const MarketProblem& problem, std::span<const double> boundaries);

struct FractionalProbeResult {
  double best;       // smallest sampled value
  double reference;  // optimal value
  std::size_t improvements;  // samples below reference - tol
  bool passed;
};

FractionalProbeResult fractional_probe(const MarketProblem& problem, std::span<const double> boundaries,
                                       std::size_t samples, std::uint64_t seed, double tol = 1e-9);

struct MoralHazardReport {
  double alpha;
  double beta;
  double var_alpha;              // VaR_alpha(X0), the cut level
  double value;                  // VaR_alpha(X1) + VaR_beta(X2) = VaR_{alpha+beta-1}(X0)
  double var_alpha_x1;           // 0
  double var_beta_x2;            // VaR_{alpha+beta-1}(X0)
  double prob_x1_positive;       // 1 - alpha
  double comonotone_optimum;
  double gap;
  double lemma_constant;         // c
  bool passed;                   // value + c <= comonotone optimum + tol
  std::string x1_description;
  std::string x2_description;
  // X2 CDF identity F_X2(x) = 1 + F(x) - alpha, checked on a grid of [0, var_alpha).
  double cdf_identity_error;
  // Seeded sample of X0 with X1, X2 formed pointwise.
  std::size_t sample_size;
  double sampled_prob_x1_positive;
  double sampled_var_beta_x2;
};

MoralHazardReport moral_hazard_counterexample(double alpha, double beta, const LossDistribution& total,
                                              std::size_t sample_size = 100000, std::uint64_t seed = 0,
                                              double tol = 1e-9);

struct LemmaCandidateResult {
  double lhs;  // VaR_alpha(f(X0)) + VaR_beta(X0 - f(X0))
  bool strict;
};

struct LemmaReport {
  double constant;  // c
  double rhs;       // c + VaR_{alpha+beta-1}(X0)
  std::vector<LemmaCandidateResult> candidates;
  bool passed;
};

LemmaReport lemma1_gap_check(double alpha, double beta, const LossDistribution& total,
                             std::span<const PiecewiseMonotoneFn> candidates);

struct MonteCarloEstimate {
  double estimate;
  double standard_error;
  std::size_t n;
};

inline constexpr std::size_t kBootstrapResamples = 200;

MonteCarloEstimate monte_carlo_risk(const LossDistribution& dist, const DistortionKernel& kernel, std::size_t n,
                                    std::uint64_t seed);

struct ConstancyReport {
  double reference;  // ρ(X0)
  std::vector<double> values;
  double max_deviation;
  bool passed;
};

// Random fractional allocations among `agents` identical agents.
ConstancyReport remark4_check(const DistortionKernel& kernel, const LossDistribution& total, std::size_t agents,
                              std::size_t trials, std::uint64_t seed, double tol = 1e-9);

}  // namespace riskalloc
