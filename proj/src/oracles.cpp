#include "riskalloc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "riskalloc/errors.hpp"
#include "riskalloc/risk.hpp"
#include "riskalloc/rng.hpp"

namespace riskalloc {

namespace {

void check_boundaries(std::span<const double> b) {
  if (b.size() < 2) throw PreconditionError("at least one cell (two boundaries) is required");
  if (b.front() != 0.0) throw PreconditionError("cell boundaries must start at 0");
  for (std::size_t c = 1; c < b.size(); ++c) {
    if (!(b[c] > b[c - 1])) throw PreconditionError("cell boundaries must be strictly ascending");
  }
  if (!std::isfinite(b.back())) throw PreconditionError("cell boundaries must be finite");
}

std::vector<double> cell_starts(std::span<const double> b) { return {b.begin(), b.end() - 1}; }

std::vector<std::vector<double>> one_hot(std::span<const std::size_t> owners, std::size_t n) {
  std::vector<std::vector<double>> shares(owners.size(), std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < owners.size(); ++c) shares[c][owners[c]] = 1.0;
  return shares;
}

// Assignment index -> owners, cell 0 most significant so index order is
// lexicographic order.
void decode(std::uint64_t index, std::size_t n, std::vector<std::size_t>& owners) {
  for (std::size_t c = owners.size(); c-- > 0;) {
    owners[c] = static_cast<std::size_t>(index % n);
    index /= n;
  }
}

double var_of(const LossDistribution& dist, double level) {
  return risk_quantile_form(dist, DistortionKernel::var_at(level));
}

// id - f for an allocation component, with knot values made monotone so that
// rounding in x - f(x) cannot produce a decreasing step.
PiecewiseMonotoneFn complement(const PiecewiseMonotoneFn& f) {
  std::vector<Knot> knots;
  for (const Knot& k : f.knots()) {
    const double y = k.x - k.y;
    knots.push_back({k.x, knots.empty() ? y : std::max(y, knots.back().y)});
  }
  return PiecewiseMonotoneFn(std::move(knots), std::max(0.0, 1.0 - f.left_slope()),
                             std::max(0.0, 1.0 - f.right_slope()));
}

void check_counterexample_inputs(double alpha, double beta, const LossDistribution& total) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
  if (!(alpha < beta)) throw PreconditionError("alpha < beta is required");
  if (!(alpha + beta > 1.0)) throw PreconditionError("alpha + beta > 1 is required");
  const auto kind = total.kind();
  if (kind != DistributionKind::exponential && kind != DistributionKind::uniform) {
    throw PreconditionError("total must be Exponential or continuous Uniform (strictly increasing continuous CDF)");
  }
  if (!(total.ess_inf() >= 0.0)) throw PreconditionError("total must be nonnegative");
}

}  // namespace

ComonotoneAllocation GridAssignment::allocation() const {
  return allocation_from_cells(cell_starts(boundaries), shares);
}

std::vector<double> aligned_cells(const LossDistribution& total) {
  if (!total.is_discrete()) throw PreconditionError("aligned cells need a discrete total");
  if (total.ess_inf() < 0.0) throw PreconditionError("total must be nonnegative");
  std::vector<double> out{0.0};
  for (double a : total.atoms()) {
    if (a > 0.0) out.push_back(a);
  }
  if (out.size() == 1) out.push_back(1.0);  // point mass at 0
  return out;
}

std::vector<double> uniform_cells(const LossDistribution& total, std::size_t k) {
  if (k == 0) throw PreconditionError("at least one cell is required");
  const double top = total.ess_sup();
  if (!std::isfinite(top) || !(top > 0.0)) throw PreconditionError("uniform cells need a finite positive ess sup");
  std::vector<double> out;
  for (std::size_t c = 0; c < k; ++c) out.push_back(top * static_cast<double>(c) / static_cast<double>(k));
  out.push_back(top);
  return out;
}

BruteForceResult brute_force_comonotone(const MarketProblem& problem, std::span<const double> boundaries) {
  check_boundaries(boundaries);
  if (!problem.total().is_discrete()) throw PreconditionError("brute force needs a discrete total");
  const std::size_t cells = boundaries.size() - 1;
  const std::size_t n = problem.size();
  if (cells > kMaxCells) {
    throw PreconditionError(std::to_string(cells) + " cells exceed the limit of " + std::to_string(kMaxCells) +
                            "; use fewer cells");
  }
  const double count = std::pow(static_cast<double>(n), static_cast<double>(cells));
  if (count > kMaxAssignments) {
    throw PreconditionError(std::to_string(n) + "^" + std::to_string(cells) +
                            " assignments exceed the limit of 1e6; use fewer cells");
  }
  const auto total = static_cast<std::uint64_t>(count);
  const std::vector<double> starts = cell_starts(boundaries);

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::uint64_t>(1, total / 64));
  std::vector<Best> partial(workers);
  auto work = [&](std::size_t w) {
    std::vector<std::size_t> owners(cells);
    const std::uint64_t lo = total * w / workers;
    const std::uint64_t hi = total * (w + 1) / workers;
    Best best;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      decode(idx, n, owners);
      const double v = evaluate_allocation(problem, allocation_from_cells(starts, one_hot(owners, n)));
      if (v < best.value) best = {v, idx};  // strict: earliest index wins ties
    }
    partial[w] = best;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  Best best = partial.front();
  for (const Best& b : partial) {
    if (b.value < best.value) best = b;  // chunks are in index order
  }

  BruteForceResult out;
  out.owners.assign(cells, 0);
  decode(best.index, n, out.owners);
  out.best.boundaries.assign(boundaries.begin(), boundaries.end());
  out.best.shares = one_hot(out.owners, n);
  out.value = best.value;
  out.evaluated = static_cast<std::size_t>(total);
  return out;
}

double grid_gap_bound(const MarketProblem& problem, std::span<const double> boundaries) {
  check_boundaries(boundaries);
  const LossDistribution& total = problem.total();
  const PsiCurve curve(problem.agents());
  double bound = 0.0;
  for (std::size_t c = 0; c + 1 < boundaries.size(); ++c) {
    const double a = boundaries[c];
    const double b = boundaries[c + 1];
    // Ψ∘F is non-increasing: the winner at a costs at most Ψ(F(a)) on the
    // whole cell and the envelope is at least its value just below b.
    const double lo = curve(total.cdf(a));
    const double fb = total.cdf_left(b);
    const double hi = total.is_discrete() ? curve(fb) : curve.left_limit(fb);
    bound += (b - a) * (lo - hi);
  }
  // Above ess sup Ψ(F) = Ψ(1) = 0 and every owner costs nothing.
  return bound;
}

FractionalProbeResult fractional_probe(const MarketProblem& problem, std::span<const double> boundaries,
                                       std::size_t samples, std::uint64_t seed, double tol) {
  check_boundaries(boundaries);
  if (samples == 0) throw PreconditionError("at least one sample is required");
  const std::vector<double> starts = cell_starts(boundaries);
  const std::size_t n = problem.size();
  FractionalProbeResult out{std::numeric_limits<double>::infinity(), optimal_value(problem), 0, true};
  Rng rng(seed);
  std::vector<std::vector<double>> shares(starts.size(), std::vector<double>(n));
  for (std::size_t s = 0; s < samples; ++s) {
    // Dirichlet weights with a random sharpness reach both interior and
    // near-vertex assignments.
    const double sharp = 1.0 + 8.0 * rng.uniform();
    for (auto& cell : shares) {
      double sum = 0.0;
      for (double& x : cell) {
        x = std::pow(-std::log(rng.uniform_open_closed()), sharp);
        sum += x;
      }
      for (double& x : cell) x /= sum;
    }
    const double v = evaluate_allocation(problem, allocation_from_cells(starts, shares));
    out.best = std::min(out.best, v);
    if (v < out.reference - tol) ++out.improvements;
  }
  out.passed = out.improvements == 0;
  return out;
}

MoralHazardReport moral_hazard_counterexample(double alpha, double beta, const LossDistribution& total,
                                              std::size_t sample_size, std::uint64_t seed, double tol) {
  check_counterexample_inputs(alpha, beta, total);
  MoralHazardReport r{};
  r.alpha = alpha;
  r.beta = beta;
  const double q = total.quantile(alpha);
  r.var_alpha = q;
  r.prob_x1_positive = total.survival(q);

  // Law of X2 = X0 1{X0 <= q}: an atom 1 - alpha at 0 plus X0 on [0, q].
  auto cdf_x2 = [&](double x) {
    if (x < 0.0) return 0.0;
    if (x >= q) return 1.0;
    return total.cdf(x) + total.survival(q);
  };
  r.cdf_identity_error = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double x = q * k / 64.0;
    r.cdf_identity_error = std::max(r.cdf_identity_error, std::abs(cdf_x2(x) - (1.0 + total.cdf(x) - alpha)));
  }
  // X1 is 0 with probability alpha, so VaR_alpha(X1) = 0; VaR_beta(X2) is the
  // least x with 1 + F(x) - alpha >= beta.
  r.var_alpha_x1 = 0.0;
  r.var_beta_x2 = total.quantile(alpha + beta - 1.0);
  r.value = r.var_alpha_x1 + r.var_beta_x2;

  const MarketProblem comonotone({{DistortionKernel::var_at(alpha), 1.0}, {DistortionKernel::var_at(beta), 1.0}},
                                 total);
  r.comonotone_optimum = optimal_value(comonotone);
  r.gap = r.comonotone_optimum - r.value;
  r.lemma_constant = (q - r.var_beta_x2) / 2.0;
  r.passed = r.value + r.lemma_constant <= r.comonotone_optimum + tol;
  std::ostringstream level;
  level.precision(17);
  level << q;
  r.x1_description = "X0 * 1{X0 > " + level.str() + "}";
  r.x2_description = "X0 * 1{X0 <= " + level.str() + "}";

  r.sample_size = sample_size;
  r.sampled_prob_x1_positive = std::numeric_limits<double>::quiet_NaN();
  r.sampled_var_beta_x2 = std::numeric_limits<double>::quiet_NaN();
  if (sample_size > 0) {
    const std::vector<double> x0 = draw(total, sample_size, seed);
    std::vector<double> x2(x0.size());
    std::size_t positive = 0;
    for (std::size_t j = 0; j < x0.size(); ++j) {
      const double x1 = x0[j] > q ? x0[j] : 0.0;
      if (x1 > 0.0) ++positive;
      x2[j] = x0[j] - x1;
    }
    r.sampled_prob_x1_positive = static_cast<double>(positive) / static_cast<double>(x0.size());
    r.sampled_var_beta_x2 = var_of(LossDistribution::empirical(std::move(x2)), beta);
  }
  return r;
}

LemmaReport lemma1_gap_check(double alpha, double beta, const LossDistribution& total,
                             std::span<const PiecewiseMonotoneFn> candidates) {
  check_counterexample_inputs(alpha, beta, total);
  for (const auto& f : candidates) {
    // f(0) = 0 with slopes in [0, 1] makes f and id - f nonnegative and
    // non-decreasing on [0, inf).
    if (!f.is_allocation_component()) {
      throw ValidationError("candidate f must satisfy f(0) = 0 with f and id - f non-decreasing");
    }
  }
  LemmaReport r;
  const double qa = total.quantile(alpha);
  const double qab = total.quantile(alpha + beta - 1.0);
  r.constant = (qa - qab) / 2.0;
  r.rhs = r.constant + qab;
  r.passed = true;
  for (const auto& f : candidates) {
    const PiecewiseMonotoneFn rest = complement(f);
    const double lhs = var_of(pushforward(total, f), alpha) + var_of(pushforward(total, rest), beta);
    const bool strict = lhs > r.rhs;
    r.candidates.push_back({lhs, strict});
    r.passed = r.passed && strict;
  }
  return r;
}

MonteCarloEstimate monte_carlo_risk(const LossDistribution& dist, const DistortionKernel& kernel, std::size_t n,
                                    std::uint64_t seed) {
  if (n < 100) throw PreconditionError("Monte Carlo needs at least 100 samples");
  std::vector<double> x = draw(dist, n, substream_seed(seed, 0));
  std::sort(x.begin(), x.end());
  const double estimate = risk_quantile_form(LossDistribution::empirical(x), kernel);

  // Bootstrap by multinomial counts over the sorted sample.
  std::vector<double> stats;
  stats.reserve(kBootstrapResamples);
  std::vector<std::size_t> counts(n);
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    Rng rng(substream_seed(seed, b + 1));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t j = 0; j < n; ++j) ++counts[rng.index(n)];
    std::vector<double> atoms;
    std::vector<double> probs;
    for (std::size_t j = 0; j < n; ++j) {
      if (counts[j] == 0) continue;
      if (!atoms.empty() && atoms.back() == x[j]) {
        probs.back() += static_cast<double>(counts[j]) / static_cast<double>(n);
      } else {
        atoms.push_back(x[j]);
        probs.push_back(static_cast<double>(counts[j]) / static_cast<double>(n));
      }
    }
    stats.push_back(risk_quantile_form(LossDistribution::discrete(std::move(atoms), std::move(probs)), kernel));
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  var /= static_cast<double>(stats.size() - 1);
  return {estimate, std::sqrt(var), n};
}

ConstancyReport remark4_check(const DistortionKernel& kernel, const LossDistribution& total, std::size_t agents,
                              std::size_t trials, std::uint64_t seed, double tol) {
  if (agents == 0) throw PreconditionError("at least one agent is required");
  if (trials == 0) throw PreconditionError("at least one trial is required");
  if (total.ess_inf() < 0.0) throw PreconditionError("total must be nonnegative");

  std::vector<double> starts{0.0};
  if (total.is_discrete() && total.atoms().size() <= 64) {
    for (double a : total.atoms()) {
      if (a > 0.0) starts.push_back(a);
    }
  } else {
    for (int k = 1; k < 8; ++k) {
      const double q = total.quantile(k / 8.0);
      if (q > starts.back()) starts.push_back(q);
    }
  }

  const MarketProblem problem(std::vector<AgentSpec>(agents, AgentSpec{kernel, 1.0}), total);
  ConstancyReport r;
  r.reference = risk_quantile_form(total, kernel);
  r.max_deviation = 0.0;
  Rng rng(seed);
  std::vector<std::vector<double>> shares(starts.size(), std::vector<double>(agents));
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& cell : shares) {
      double sum = 0.0;
      for (double& x : cell) {
        x = rng.uniform();
        sum += x;
      }
      if (sum == 0.0) {
        cell.assign(agents, 0.0);
        cell.front() = 1.0;
        continue;
      }
      for (double& x : cell) x /= sum;
    }
    const double v = evaluate_allocation(problem, allocation_from_cells(starts, shares));
    r.values.push_back(v);
    r.max_deviation = std::max(r.max_deviation, std::abs(v - r.reference));
  }
  r.passed = r.max_deviation <= tol;
  return r;
}

}  // namespace riskalloc
