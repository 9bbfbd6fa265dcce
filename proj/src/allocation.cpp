#include "riskalloc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskalloc/errors.hpp"
#include "riskalloc/risk.hpp"

namespace riskalloc {

namespace {

constexpr double kShareTol = 1e-12;

std::vector<AffinePiece> survival_pieces(const AgentSpec& agent) {
  std::vector<AffinePiece> out;
  out.reserve(agent.kernel.pieces().size());
  for (const AffinePiece& p : agent.kernel.pieces())
    out.push_back({p.start, agent.weight * (1.0 - p.value), -agent.weight * p.slope});
  return out;
}

std::vector<EnvelopePiece> psi_envelope(std::span<const AgentSpec> agents) {
  if (agents.empty()) throw PreconditionError("at least one agent is required");
  std::vector<std::vector<AffinePiece>> fns;
  fns.reserve(agents.size());
  for (const AgentSpec& a : agents) fns.push_back(survival_pieces(a));
  return envelope(fns, EnvelopeSense::lower);
}

// Cell starts with an owner each; equal starts keep the later owner, equal
// neighbouring owners are merged.
void push_cell(std::vector<double>& starts, std::vector<std::size_t>& owners, double start, std::size_t owner) {
  if (!starts.empty() && starts.back() == start) {
    owners.back() = owner;
  } else {
    starts.push_back(start);
    owners.push_back(owner);
  }
  if (owners.size() >= 2 && owners[owners.size() - 2] == owners.back()) {
    starts.pop_back();
    owners.pop_back();
  }
}

}  // namespace

MarketProblem::MarketProblem(std::vector<AgentSpec> agents, LossDistribution total)
    : agents_(std::move(agents)), total_(std::move(total)) {
  if (agents_.empty()) throw PreconditionError("at least one agent is required");
  for (const AgentSpec& a : agents_)
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw PreconditionError("agent weights must be positive and finite");
  if (!total_.is_nonnegative()) throw PreconditionError("total risk must be nonnegative (ess inf " +
                                                        std::to_string(total_.ess_inf()) + " < 0)");
}

double psi(std::span<const AgentSpec> agents, double t) {
  if (agents.empty()) throw PreconditionError("at least one agent is required");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("psi level must lie in [0, 1]");
  double best = std::numeric_limits<double>::infinity();
  for (const AgentSpec& a : agents) best = std::min(best, a.weight * (1.0 - a.kernel(t)));
  return best;
}

PsiCurve::PsiCurve(std::span<const AgentSpec> agents) {
  for (const EnvelopePiece& e : psi_envelope(agents)) pieces_.push_back({e.start, e.value, e.slope});
}

double PsiCurve::operator()(double t) const {
  if (t >= 1.0) return 0.0;
  return evaluate_pieces(pieces_, std::max(t, 0.0));
}

double PsiCurve::left_limit(double t) const {
  if (t <= 0.0) return pieces_.front().value;
  return left_limit_pieces(pieces_, std::min(t, 1.0));
}

std::size_t LevelSelector::winner_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const SelectorPiece& p) { return v < p.start; });
  return it == pieces_.begin() ? pieces_.front().winner : (it - 1)->winner;
}

std::vector<TieRegion> LevelSelector::tie_regions() const {
  std::vector<TieRegion> out;
  for (const SelectorPiece& p : pieces_) {
    if (p.tied.empty()) continue;
    if (!out.empty() && out.back().end == p.start && out.back().agents == p.tied) {
      out.back().end = p.end;
    } else {
      out.push_back({p.start, p.end, p.tied});
    }
  }
  return out;
}

LevelSelector optimal_selector(std::span<const AgentSpec> agents, TieBreak tie_break) {
  const auto env = psi_envelope(agents);
  std::vector<SelectorPiece> pieces;
  for (std::size_t k = 0; k < env.size(); ++k) {
    const EnvelopePiece& e = env[k];
    const double end = k + 1 < env.size() ? env[k + 1].start : 1.0;
    const std::size_t winner = tie_break == TieBreak::highest && !e.tied.empty() ? e.tied.back() : e.winner;
    if (!pieces.empty() && pieces.back().winner == winner && pieces.back().tied == e.tied) {
      pieces.back().end = end;
    } else {
      pieces.push_back({e.start, end, winner, e.tied});
    }
  }
  return LevelSelector(std::move(pieces));
}

double StepFn::operator()(double x) const {
  auto it = std::upper_bound(starts.begin(), starts.end(), x);
  return it == starts.begin() ? values.front() : values[static_cast<std::size_t>(it - starts.begin() - 1)];
}

ComonotoneAllocation allocation_from_cells(std::span<const double> starts, std::span<const std::vector<double>> shares) {
  if (starts.empty() || starts.size() != shares.size()) throw ValidationError("one share vector per cell is required");
  if (starts.front() != 0.0) throw ValidationError("the first cell must start at 0");
  const std::size_t n = shares.front().size();
  if (n == 0) throw ValidationError("at least one agent is required");
  for (std::size_t c = 0; c < starts.size(); ++c) {
    if (c > 0 && !(starts[c] > starts[c - 1])) throw ValidationError("cell starts must be strictly ascending");
    if (shares[c].size() != n) throw ValidationError("every cell needs one share per agent");
    double total = 0.0;
    for (double s : shares[c]) {
      if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("shares must lie in [0, 1]");
      total += s;
    }
    if (std::abs(total - 1.0) > kShareTol) throw ValidationError("shares must sum to 1 in every cell");
  }

  ComonotoneAllocation out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Knot> knots;
    StepFn h;
    double y = 0.0;
    for (std::size_t c = 0; c < starts.size(); ++c) {
      if (c > 0) y += shares[c - 1][i] * (starts[c] - starts[c - 1]);
      knots.push_back({starts[c], y});
      if (h.values.empty() || h.values.back() != shares[c][i]) {
        h.starts.push_back(starts[c]);
        h.values.push_back(shares[c][i]);
      }
    }
    out.components.push_back(PiecewiseMonotoneFn(std::move(knots), shares.front()[i], shares.back()[i]).simplified());
    out.marginals.push_back(std::move(h));
  }
  return out;
}

ComonotoneAllocation optimal_allocation(const MarketProblem& problem, TieBreak tie_break) {
  const LevelSelector selector = optimal_selector(problem.agents(), tie_break);
  const LossDistribution& total = problem.total();
  std::vector<double> starts;
  std::vector<std::size_t> owners;
  if (total.is_discrete()) {
    push_cell(starts, owners, 0.0, selector.winner_at(total.cdf(0.0)));
    for (double a : total.atoms())
      if (a > 0.0) push_cell(starts, owners, a, selector.winner_at(total.cdf(a)));
  } else {
    const auto& pieces = selector.pieces();
    push_cell(starts, owners, 0.0, pieces.front().winner);
    for (std::size_t k = 1; k < pieces.size(); ++k)
      push_cell(starts, owners, std::max(0.0, total.quantile(pieces[k].start)), pieces[k].winner);
  }
  std::vector<std::vector<double>> shares(starts.size(), std::vector<double>(problem.size(), 0.0));
  for (std::size_t c = 0; c < starts.size(); ++c) shares[c][owners[c]] = 1.0;
  return allocation_from_cells(starts, shares);
}

double optimal_value(const MarketProblem& problem) {
  const LossDistribution& total = problem.total();
  const auto& agents = problem.agents();
  if (total.is_discrete()) {
    // Ψ(F(s)) is constant between consecutive support points; runs of equal
    // value are integrated as one interval so lengths stay exact.
    double acc = 0.0;
    double run_start = 0.0;
    double run_value = psi(agents, total.cdf(0.0));
    for (double a : total.atoms()) {
      if (!(a > 0.0)) continue;
      const double v = psi(agents, total.cdf(a));
      if (v == run_value) continue;
      acc += run_value * (a - run_start);
      run_start = a;
      run_value = v;
    }
    if (run_value != 0.0) throw DomainError("optimal value diverges: Psi(1) must vanish");
    return acc;
  }

  const PsiCurve curve(agents);
  const auto& pieces = curve.pieces();
  double scale = 0.0;
  for (const AgentSpec& a : agents) scale = std::max(scale, a.weight);
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const AffinePiece& p = pieces[k];
    const bool last = k + 1 == pieces.size();
    const double lo = k == 0 ? 0.0 : total.quantile(p.start);
    const double hi = last ? total.ess_sup() : total.quantile(pieces[k + 1].start);
    if (!(hi > lo)) continue;
    if (std::isfinite(hi)) {
      acc += (p.value - p.slope * p.start) * (hi - lo);
      if (p.slope != 0.0) acc += p.slope * total.cdf_integral(lo, hi);
    } else {
      const double end = p.value + p.slope * (1.0 - p.start);
      if (end > 1e-12 * scale)
        throw DomainError("optimal value diverges: Psi(1-) > 0 with an unbounded total (regularity violated)");
      acc -= p.slope * total.upper_survival_integral(lo);
    }
  }
  return acc;
}

void validate_allocation(const ComonotoneAllocation& alloc, std::size_t agents, double tol) {
  if (alloc.components.size() != agents) throw ValidationError("allocation needs one component per agent");
  for (std::size_t i = 0; i < agents; ++i)
    if (!alloc.components[i].is_allocation_component(tol))
      throw ValidationError("component " + std::to_string(i + 1) +
                            " must satisfy f(0) = 0 and be non-decreasing and 1-Lipschitz");
  std::vector<double> xs{0.0};
  double left = 0.0;
  double right = 0.0;
  for (const auto& f : alloc.components) {
    for (const Knot& k : f.knots()) xs.push_back(k.x);
    left += f.left_slope();
    right += f.right_slope();
  }
  if (std::abs(left - 1.0) > tol || std::abs(right - 1.0) > tol)
    throw ValidationError("allocation components must sum to the identity");
  for (double x : xs) {
    double s = 0.0;
    for (const auto& f : alloc.components) s += f(x);
    if (std::abs(s - x) > tol * std::max(1.0, std::abs(x)))
      throw ValidationError("allocation components must sum to the identity (off by " + std::to_string(s - x) +
                            " at x = " + std::to_string(x) + ")");
  }
}

AllocationEvaluation evaluate_allocation_detail(const MarketProblem& problem, const ComonotoneAllocation& alloc) {
  validate_allocation(alloc, problem.size());
  AllocationEvaluation out{0.0, {}};
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const AgentSpec& a = problem.agents()[i];
    const double r = risk_quantile_form(pushforward(problem.total(), alloc.components[i]), a.kernel);
    out.risks.push_back(r);
    out.value += a.weight * r;
  }
  return out;
}

double evaluate_allocation(const MarketProblem& problem, const ComonotoneAllocation& alloc) {
  return evaluate_allocation_detail(problem, alloc).value;
}

DistortionKernel convolution_kernel(std::span<const AgentSpec> agents) {
  if (agents.empty()) throw PreconditionError("at least one agent is required");
  std::vector<DistortionKernel> kernels;
  for (const AgentSpec& a : agents) {
    if (a.weight != agents.front().weight)
      throw PreconditionError("convolution kernel requires equal weights; use optimal_value for weighted problems");
    kernels.push_back(a.kernel);
  }
  return max_kernel(kernels);
}

RegularityReport regularity_check(const DistortionKernel& kernel, const LossDistribution& total,
                                  std::span<const double> levels, double threshold) {
  RegularityReport out{{levels.begin(), levels.end()}, {}, false};
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (!(levels[k] > levels[k - 1])) throw PreconditionError("truncation levels must be ascending");
  const bool finite = in_domain(total, kernel);
  const double full = finite ? risk_quantile_form(total, kernel) : 0.0;
  for (double m : levels) {
    if (!(m > total.ess_inf())) throw PreconditionError("truncation level must exceed the essential infimum");
    out.gaps.push_back(finite ? std::abs(risk_quantile_form(truncate(total, m), kernel) - full)
                              : std::numeric_limits<double>::infinity());
  }
  out.passed = finite && !out.gaps.empty() && out.gaps.back() <= threshold;
  return out;
}

}  // namespace riskalloc
