#include "riskalloc/duality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskalloc/distribution.hpp"
#include "riskalloc/risk.hpp"
#include "riskalloc/rng.hpp"
#include "riskalloc/simplex.hpp"

namespace riskalloc {

namespace {

constexpr double kCutTol = 1e-10;
constexpr double kSlopeTol = 1e-9;

bool same_space(const FiniteSpace& a, const FiniteSpace& b) {
  return std::equal(a.probs().begin(), a.probs().end(), b.probs().begin(), b.probs().end());
}

std::vector<double> event_sums(std::span<const double> q) {
  std::vector<double> out(std::size_t{1} << q.size(), 0.0);
  for (std::size_t mask = 1; mask < out.size(); ++mask)
    out[mask] = out[mask & (mask - 1)] + q[static_cast<std::size_t>(std::countr_zero(mask))];
  return out;
}

std::string describe_mask(std::uint32_t mask, std::size_t m) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (std::size_t j = 0; j < m; ++j)
    if (mask >> j & 1U) {
      os << (first ? "" : ",") << j + 1;
      first = false;
    }
  os << "}";
  return os.str();
}

void check_sets(std::span<const ScenarioSet> sets, std::span<const double> weights) {
  if (sets.empty()) throw PreconditionError("at least one scenario set is required");
  if (sets.size() != weights.size()) throw PreconditionError("one weight per scenario set is required");
  for (const auto& s : sets)
    if (!same_space(s.space(), sets.front().space()))
      throw PreconditionError("scenario sets must share one probability space");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw PreconditionError("weights must be positive and finite");
}

// Weights must agree for the total-mass equalities to be compatible.
std::optional<FeasibilityReport> mass_conflict(std::span<const double> weights) {
  const auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
  if (*hi - *lo <= 1e-12 * *hi) return std::nullopt;
  std::ostringstream os;
  os << "total mass: sum(q) = " << *lo << " (set " << (lo - weights.begin()) + 1 << ") and sum(q) = " << *hi
     << " (set " << (hi - weights.begin()) + 1 << ") cannot both hold";
  return FeasibilityReport{false, {}, os.str(), *hi - *lo};
}

struct CuttingPlaneResult {
  LpResult lp;
  std::string witness;
};

// Optimises objective'q over ∩ weight·Δ_i, adding the most violated event
// constraint of every set until none is violated.
CuttingPlaneResult cutting_plane(std::span<const ScenarioSet> sets, double weight, std::span<const double> objective) {
  const std::size_t m = sets.front().space().size();
  LinearProgram lp;
  lp.objective.assign(objective.begin(), objective.end());
  lp.add_row(std::vector<double>(m, 1.0), RowSense::equal, weight);
  struct Cut {
    std::size_t set;
    std::uint32_t mask;
  };
  std::vector<Cut> cuts;
  auto add_cut = [&](std::size_t s, std::uint32_t mask) {
    std::vector<double> row(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
      if (mask >> j & 1U) row[j] = 1.0;
    lp.add_row(std::move(row), RowSense::less_equal, weight * sets[s].bounds()[mask]);
    cuts.push_back({s, mask});
  };
  for (std::size_t s = 0; s < sets.size(); ++s)
    for (std::size_t j = 0; j < m; ++j) add_cut(s, std::uint32_t{1} << j);

  const std::size_t max_rounds = sets.size() * (std::size_t{1} << m) + 1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    LpResult res = solve(lp);
    if (res.status == LpStatus::infeasible) {
      // Report the cut most violated at the phase-one minimiser.
      const auto sums = event_sums(res.x);
      double worst = -std::numeric_limits<double>::infinity();
      std::string witness = "total mass";
      for (const Cut& c : cuts) {
        const double v = sums[c.mask] - weight * sets[c.set].bounds()[c.mask];
        if (v > worst) {
          worst = v;
          witness = "set " + std::to_string(c.set + 1) + ", event " + describe_mask(c.mask, m);
        }
      }
      return {std::move(res), witness};
    }
    bool added = false;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const auto [v, mask] = sets[s].max_violation(res.x, weight);
      if (v > kCutTol) {
        add_cut(s, mask);
        added = true;
      }
    }
    if (!added) return {std::move(res), {}};
  }
  throw std::logic_error("cutting-plane loop did not converge");
}

UnboundednessCertificate finish(std::span<const AgentSpec> agents, const FiniteSpace& space,
                                UnboundednessCertificate cert) {
  cert.slope = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i)
    cert.slope += agents[i].weight * risk_on_space(agents[i].kernel, space, cert.direction[i]);
  for (std::size_t k = 0; k < kVerificationPoints.size(); ++k)
    cert.verification[k] = certificate_objective(agents, space, cert, kVerificationPoints[k]);
  return cert;
}

// Base for a generic direction: the absorber carries X0 shifted along its
// direction past every ordering change of x0 + t·d, so the objective is
// affine in c >= 0.
UnboundednessCertificate generic_certificate(std::span<const AgentSpec> agents, const FiniteSpace& space,
                                             std::span<const double> x0, std::vector<std::vector<double>> direction,
                                             CertificateKind kind, std::uint64_t iteration) {
  const std::size_t absorber = 0;
  const auto& d = direction[absorber];
  double shift = 0.0;
  for (std::size_t j = 0; j < x0.size(); ++j)
    for (std::size_t k = 0; k < x0.size(); ++k)
      if (d[j] > d[k]) shift = std::max(shift, (x0[k] - x0[j]) / (d[j] - d[k]));
  UnboundednessCertificate cert{kind, {}, std::move(direction), absorber, 0.0, {}, iteration};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    std::vector<double> b(x0.size());
    for (std::size_t j = 0; j < x0.size(); ++j)
      b[j] = (i == absorber ? x0[j] : 0.0) + shift * cert.direction[i][j];
    cert.base.push_back(std::move(b));
  }
  return finish(agents, space, std::move(cert));
}

void check_vector(const FiniteSpace& space, std::span<const double> x, const char* what) {
  if (x.size() != space.size()) throw PreconditionError(std::string(what) + " must have one value per atom");
}

}  // namespace

FiniteSpace::FiniteSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw PreconditionError("finite space needs at least one atom");
  if (probs_.size() > kMaxAtoms) throw PreconditionError("finite space is limited to 12 atoms");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("atom probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("atom probabilities must sum to 1");
  event_probs_ = event_sums(probs_);
  event_probs_.back() = 1.0;
}

double risk_on_space(const DistortionKernel& kernel, const FiniteSpace& space, std::span<const double> values) {
  check_vector(space, values, "value vector");
  return risk_quantile_form(from_values(values, space.probs()), kernel);
}

ScenarioSet::ScenarioSet(const DistortionKernel& kernel, const FiniteSpace& space) : space_(space) {
  if (!kernel.is_convex())
    throw PreconditionError("scenario sets are defined for convex kernels only (" + kernel.label() + " is not convex)");
  const DualDistortion g(kernel);
  bounds_.reserve(space.event_probs().size());
  for (double pa : space.event_probs()) bounds_.push_back(g(pa));
  bounds_.front() = 0.0;
  bounds_.back() = 1.0;
}

std::pair<double, std::uint32_t> ScenarioSet::max_violation(std::span<const double> q, double weight) const {
  const auto sums = event_sums(q);
  double worst = -std::numeric_limits<double>::infinity();
  std::uint32_t arg = 0;
  for (std::uint32_t mask = 1; mask < sums.size(); ++mask) {
    const double v = sums[mask] - weight * bounds_[mask];
    if (v > worst) {
      worst = v;
      arg = mask;
    }
  }
  return {worst, arg};
}

bool ScenarioSet::contains(std::span<const double> q, double weight, double tol) const {
  if (q.size() != space_.size()) return false;
  double total = 0.0;
  for (double v : q) {
    if (v < -tol) return false;
    total += v;
  }
  if (std::abs(total - weight) > tol) return false;
  return max_violation(q, weight).first <= tol;
}

FeasibilityReport intersection_feasible(std::span<const ScenarioSet> sets, std::span<const double> weights) {
  check_sets(sets, weights);
  if (auto conflict = mass_conflict(weights)) return *conflict;
  const std::vector<double> zero(sets.front().space().size(), 0.0);
  auto res = cutting_plane(sets, weights.front(), zero);
  if (res.lp.status != LpStatus::optimal) return {false, res.lp.x, res.witness, res.lp.infeasibility};
  return {true, res.lp.x, {}, 0.0};
}

SupportResult support_value(std::span<const ScenarioSet> sets, std::span<const double> weights,
                            std::span<const double> x0) {
  check_sets(sets, weights);
  check_vector(sets.front().space(), x0, "total");
  if (auto conflict = mass_conflict(weights)) throw InfeasibleIntersection(*conflict);
  auto res = cutting_plane(sets, weights.front(), x0);
  if (res.lp.status != LpStatus::optimal)
    throw InfeasibleIntersection({false, res.lp.x, res.witness, res.lp.infeasibility});
  return {res.lp.objective, res.lp.x};
}

std::optional<AttainabilityWitness> attainability_witness(std::span<const AgentSpec> agents, const FiniteSpace& space,
                                                          std::span<const std::vector<double>> allocation,
                                                          double tol) {
  if (agents.size() != allocation.size()) throw PreconditionError("one value vector per agent is required");
  std::vector<ScenarioSet> sets;
  std::vector<double> weights;
  std::vector<double> x0(space.size(), 0.0);
  std::vector<double> targets;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    check_vector(space, allocation[i], "allocation");
    sets.emplace_back(agents[i].kernel, space);
    weights.push_back(agents[i].weight);
    for (std::size_t j = 0; j < space.size(); ++j) x0[j] += allocation[i][j];
    targets.push_back(agents[i].weight * risk_on_space(agents[i].kernel, space, allocation[i]));
  }
  SupportResult sup{};
  try {
    sup = support_value(sets, weights, x0);
  } catch (const InfeasibleIntersection&) {
    return std::nullopt;
  }
  // E_q[X_i] <= λ_i ρ_i(X_i) for each i, so equality of the sums forces
  // equality of every term.
  for (std::size_t i = 0; i < agents.size(); ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < space.size(); ++j) e += sup.maximizer[j] * allocation[i][j];
    if (std::abs(e - targets[i]) > tol * std::max(1.0, std::abs(targets[i]))) return std::nullopt;
  }
  AttainabilityWitness w{sup.maximizer, {}};
  for (std::size_t j = 0; j < space.size(); ++j) w.density.push_back(sup.maximizer[j] / space.probs()[j]);
  return w;
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::cash_transfer: return "cash_transfer";
    case CertificateKind::var_mean: return "var_mean";
    case CertificateKind::indicator_pair: return "indicator_pair";
    case CertificateKind::random_search: return "random_search";
  }
  return "unknown";
}

double certificate_objective(std::span<const AgentSpec> agents, const FiniteSpace& space,
                             const UnboundednessCertificate& cert, double c) {
  double acc = 0.0;
  std::vector<double> x(space.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = 0; j < space.size(); ++j) x[j] = cert.base[i][j] + c * cert.direction[i][j];
    acc += agents[i].weight * risk_on_space(agents[i].kernel, space, x);
  }
  return acc;
}

bool verify_certificate(std::span<const AgentSpec> agents, const FiniteSpace& space,
                        const UnboundednessCertificate& cert, double tol) {
  if (cert.base.size() != agents.size() || cert.direction.size() != agents.size()) return false;
  for (std::size_t j = 0; j < space.size(); ++j) {
    double s = 0.0;
    for (const auto& d : cert.direction) s += d[j];
    if (s != 0.0) return false;
  }
  if (!(cert.slope < -kSlopeTol)) return false;
  std::array<double, 3> obj{};
  for (std::size_t k = 0; k < obj.size(); ++k) obj[k] = certificate_objective(agents, space, cert, kVerificationPoints[k]);
  const double scale = std::max({1.0, std::abs(obj[0]), std::abs(obj[2])});
  for (std::size_t k = 1; k < obj.size(); ++k) {
    const double expected = (kVerificationPoints[k] - kVerificationPoints[0]) * cert.slope;
    if (std::abs(obj[k] - obj[0] - expected) > tol * scale) return false;
  }
  return true;
}

UnboundednessCertificate rebase(const UnboundednessCertificate& cert, std::span<const AgentSpec> agents,
                                const FiniteSpace& space, std::span<const double> new_x0) {
  check_vector(space, new_x0, "total");
  if (cert.kind == CertificateKind::indicator_pair || cert.kind == CertificateKind::random_search)
    return generic_certificate(agents, space, new_x0, cert.direction, cert.kind, cert.iteration);
  // Constant and indicator rays are affine from c = 0 for any base.
  UnboundednessCertificate out = cert;
  for (std::size_t j = 0; j < space.size(); ++j) {
    double others = 0.0;
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (i != cert.absorber) others += cert.base[i][j];
    out.base[cert.absorber][j] = new_x0[j] - others;
  }
  return finish(agents, space, std::move(out));
}

std::optional<UnboundednessCertificate> cash_transfer_certificate(std::span<const AgentSpec> agents,
                                                                  const FiniteSpace& space,
                                                                  std::span<const double> x0) {
  if (agents.size() < 2) throw PreconditionError("cash transfer needs at least two agents");
  check_vector(space, x0, "total");
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 1; i < agents.size(); ++i) {
    if (agents[i].weight < agents[lo].weight) lo = i;
    if (agents[i].weight > agents[hi].weight) hi = i;
  }
  if (agents[lo].weight == agents[hi].weight) return std::nullopt;
  const std::size_t m = space.size();
  UnboundednessCertificate cert{CertificateKind::cash_transfer, {}, {}, 0, 0.0, {}, 0};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    cert.base.push_back(i == 0 ? std::vector<double>(x0.begin(), x0.end()) : std::vector<double>(m, 0.0));
    cert.direction.emplace_back(m, i == lo ? 1.0 : i == hi ? -1.0 : 0.0);
  }
  return finish(agents, space, std::move(cert));
}

std::optional<UnboundednessCertificate> var_mean_certificate(const FiniteSpace& space, double alpha,
                                                             std::span<const double> x0, double weight) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("VaR level must lie in (0, 1)");
  check_vector(space, x0, "total");
  // VaR_alpha(c·1_A) = 0 exactly when P(A) <= 1 - alpha; the largest such
  // event gives the steepest ray.
  const auto& ep = space.event_probs();
  std::uint32_t best = 0;
  for (std::uint32_t mask = 1; mask < ep.size(); ++mask)
    if (ep[mask] <= 1.0 - alpha + 1e-12 && (best == 0 || ep[mask] > ep[best])) best = mask;
  if (best == 0) return std::nullopt;
  const std::size_t m = space.size();
  std::vector<double> ind(m, 0.0);
  std::vector<double> neg(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    if (best >> j & 1U) {
      ind[j] = 1.0;
      neg[j] = -1.0;
    }
  const std::vector<AgentSpec> agents{{DistortionKernel::var_at(alpha), weight}, {DistortionKernel::expectation(), weight}};
  UnboundednessCertificate cert{CertificateKind::var_mean,
                                {std::vector<double>(m, 0.0), std::vector<double>(x0.begin(), x0.end())},
                                {ind, neg},
                                1,
                                0.0,
                                {},
                                0};
  return finish(agents, space, std::move(cert));
}

std::optional<UnboundednessCertificate> indicator_pair_certificate(std::span<const AgentSpec> agents,
                                                                   const FiniteSpace& space,
                                                                   std::span<const double> x0) {
  check_vector(space, x0, "total");
  const std::size_t m = space.size();
  const std::uint32_t full = (std::uint32_t{1} << m) - 1;
  double best = -kSlopeTol;
  std::optional<std::tuple<std::size_t, std::size_t, std::uint32_t>> arg;
  std::vector<double> ind(m);
  std::vector<double> neg(m);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    for (std::size_t j = 0; j < m; ++j) {
      ind[j] = (mask >> j & 1U) ? 1.0 : 0.0;
      neg[j] = -ind[j];
    }
    std::vector<double> up(agents.size());
    std::vector<double> down(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      up[i] = agents[i].weight * risk_on_space(agents[i].kernel, space, ind);
      down[i] = agents[i].weight * risk_on_space(agents[i].kernel, space, neg);
    }
    for (std::size_t i = 0; i < agents.size(); ++i)
      for (std::size_t k = 0; k < agents.size(); ++k)
        if (i != k && up[i] + down[k] < best) {
          best = up[i] + down[k];
          arg = std::make_tuple(i, k, mask);
        }
  }
  if (!arg) return std::nullopt;
  const auto [i, k, mask] = *arg;
  std::vector<std::vector<double>> dir(agents.size(), std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j)
    if (mask >> j & 1U) {
      dir[i][j] = 1.0;
      dir[k][j] = -1.0;
    }
  return generic_certificate(agents, space, x0, std::move(dir), CertificateKind::indicator_pair, 0);
}

std::optional<UnboundednessCertificate> randomized_certificate_search(std::span<const AgentSpec> agents,
                                                                      const FiniteSpace& space,
                                                                      std::span<const double> x0,
                                                                      std::uint64_t iterations, std::uint64_t seed) {
  if (iterations < 1) throw PreconditionError("at least one iteration is required");
  check_vector(space, x0, "total");
  const std::size_t n = agents.size();
  const std::size_t m = space.size();
  if (n < 2) return std::nullopt;
  std::vector<std::vector<double>> dir(n, std::vector<double>(m));
  for (std::uint64_t it = 0; it < iterations; ++it) {
    Rng rng(substream_seed(seed, it));
    for (std::size_t j = 0; j < m; ++j) {
      double partial = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double v = (rng.bits() & 1U) ? static_cast<double>(rng.index(3)) - 1.0 : rng.normal();
        dir[i][j] = v;
        partial += v;
      }
      dir[n - 1][j] = -partial;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += agents[i].weight * risk_on_space(agents[i].kernel, space, dir[i]);
    if (slope < -kSlopeTol) return generic_certificate(agents, space, x0, dir, CertificateKind::random_search, it);
  }
  return std::nullopt;
}

}  // namespace riskalloc
