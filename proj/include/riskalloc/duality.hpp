#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskalloc/allocation.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/kernel.hpp"

namespace riskalloc {

// Finite probability space with m <= 12 atoms of positive probability.
class FiniteSpace {
 public:
  static constexpr std::size_t kMaxAtoms = 12;
  explicit FiniteSpace(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  // P(A) for every event, indexed by bit mask.
  const std::vector<double>& event_probs() const noexcept { return event_probs_; }

 private:
  std::vector<double> probs_;
  std::vector<double> event_probs_;
};

// ρ_Φ of a value vector on the space.
double risk_on_space(const DistortionKernel& kernel, const FiniteSpace& space, std::span<const double> values);

// Scenario measures of a coherent distortion measure: q >= 0, Σq = 1 and
// q(A) <= g(P(A)) for every event A. Elements are stored as measures q,
// i.e. q_j = p_j Y_j for the density Y.
class ScenarioSet {
 public:
  ScenarioSet(const DistortionKernel& kernel, const FiniteSpace& space);

  const FiniteSpace& space() const noexcept { return space_; }
  // g(P(A)) per event mask.
  const std::vector<double>& bounds() const noexcept { return bounds_; }
  // Largest violation of q ∈ weight·Δ, with the offending event mask.
  std::pair<double, std::uint32_t> max_violation(std::span<const double> q, double weight) const;
  bool contains(std::span<const double> q, double weight = 1.0, double tol = 1e-9) const;

 private:
  FiniteSpace space_;
  std::vector<double> bounds_;
};

struct FeasibilityReport {
  bool feasible;
  std::vector<double> point;  // q in every weight_i·Δ_i when feasible
  std::string witness;        // violated constraint when infeasible
  double violation = 0.0;
};

FeasibilityReport intersection_feasible(std::span<const ScenarioSet> sets, std::span<const double> weights);

class InfeasibleIntersection : public PreconditionError {
 public:
  explicit InfeasibleIntersection(FeasibilityReport report)
      : PreconditionError("scenario sets do not intersect: " + report.witness), report_(std::move(report)) {}
  const FeasibilityReport& report() const noexcept { return report_; }

 private:
  FeasibilityReport report_;
};

struct SupportResult {
  double value;
  std::vector<double> maximizer;  // q
};

// sup of E_q[X0] over q ∈ ∩ weight_i·Δ_i.
SupportResult support_value(std::span<const ScenarioSet> sets, std::span<const double> weights,
                            std::span<const double> x0);

struct AttainabilityWitness {
  std::vector<double> measure;  // q
  std::vector<double> density;  // Y = q / p
};

// Y in the intersection with E[Y X_i] = λ_i ρ_i(X_i) for every agent, if any.
std::optional<AttainabilityWitness> attainability_witness(std::span<const AgentSpec> agents, const FiniteSpace& space,
                                                          std::span<const std::vector<double>> allocation,
                                                          double tol = 1e-9);

enum class CertificateKind { cash_transfer, var_mean, indicator_pair, random_search };
std::string to_string(CertificateKind kind);

// objective(c) = Σ λ_i ρ_i(base_i + c·direction_i) is affine for c >= 0 with
// the given slope; Σ direction_i = 0 and Σ base_i = X0.
struct UnboundednessCertificate {
  CertificateKind kind;
  std::vector<std::vector<double>> base;
  std::vector<std::vector<double>> direction;
  std::size_t absorber;  // agent whose base carries X0
  double slope;
  std::array<double, 3> verification;  // objective at c = 1, 10, 100
  std::uint64_t iteration = 0;         // search iteration that found it, if any
};

inline constexpr std::array<double, 3> kVerificationPoints{1.0, 10.0, 100.0};

double certificate_objective(std::span<const AgentSpec> agents, const FiniteSpace& space,
                             const UnboundednessCertificate& cert, double c);

// Zero-sum direction, negative slope and affinity at c = 1, 10, 100.
bool verify_certificate(std::span<const AgentSpec> agents, const FiniteSpace& space,
                        const UnboundednessCertificate& cert, double tol = 1e-9);

// Same ray for another total on the same space: the absorber's base is
// recomputed (and shifted past every ordering change of its values).
UnboundednessCertificate rebase(const UnboundednessCertificate& cert, std::span<const AgentSpec> agents,
                                const FiniteSpace& space, std::span<const double> new_x0);

std::optional<UnboundednessCertificate> cash_transfer_certificate(std::span<const AgentSpec> agents,
                                                                  const FiniteSpace& space,
                                                                  std::span<const double> x0);

// Agents (VaR_alpha, expectation) with common weight; alpha in (0, 1).
std::optional<UnboundednessCertificate> var_mean_certificate(const FiniteSpace& space, double alpha,
                                                             std::span<const double> x0, double weight = 1.0);

// Best ray of the form D_i = 1_A, D_j = -1_A over agent pairs and events.
std::optional<UnboundednessCertificate> indicator_pair_certificate(std::span<const AgentSpec> agents,
                                                                   const FiniteSpace& space,
                                                                   std::span<const double> x0);

// Random zero-sum directions; a miss is not a proof of boundedness.
std::optional<UnboundednessCertificate> randomized_certificate_search(std::span<const AgentSpec> agents,
                                                                      const FiniteSpace& space,
                                                                      std::span<const double> x0,
                                                                      std::uint64_t iterations, std::uint64_t seed);

}  // namespace riskalloc
