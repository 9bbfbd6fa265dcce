#include "riskalloc/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

void require_domain(const LossDistribution& dist, const DistortionKernel& kernel) {
  if (!in_domain(dist, kernel))
    throw DomainError("risk integral diverges: kernel " + kernel.label() + " has an atom at level 1 and " +
                      dist.describe() + " has an unbounded upper tail");
}

}  // namespace

bool in_domain(const LossDistribution& dist, const DistortionKernel& kernel) {
  return !(kernel.atom_at_one() > 0.0 && !std::isfinite(dist.ess_sup()));
}

double risk_quantile_form(const LossDistribution& dist, const DistortionKernel& kernel) {
  require_domain(dist, kernel);
  const auto& pieces = kernel.pieces();
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (pieces[k].slope > 0.0)
      acc += pieces[k].slope * dist.quantile_integral(pieces[k].start, kernel.piece_end(k));
  }
  for (const auto& jump : kernel.jumps())
    acc += jump.mass * (jump.location < 1.0 ? dist.quantile(jump.location) : dist.ess_sup());
  return acc;
}

ChoquetParts choquet_parts(const LossDistribution& dist, const DistortionKernel& kernel) {
  require_domain(dist, kernel);
  const auto& pieces = kernel.pieces();
  const double lower = std::min(0.0, dist.ess_inf());
  const double top = dist.ess_sup();
  ChoquetParts parts{0.0, 0.0};

  // Finite region [lo, hi) on one side of 0 where Φ(F(x)) = v + s (F(x) - t0).
  auto add_finite = [&](double lo, double hi, double v, double s, double t0) {
    if (!(hi > lo)) return;
    const double indicator = lo >= 0.0 ? 1.0 : 0.0;
    double part = (indicator - v + s * t0) * (hi - lo);
    if (s != 0.0) part -= s * dist.cdf_integral(lo, hi);
    (lo >= 0.0 ? parts.positive : parts.negative) += part;
  };
  auto add_region = [&](double lo, double hi, double v, double s, double t0) {
    if (!(hi > lo)) return;
    if (lo < 0.0 && hi > 0.0) {
      add_finite(lo, 0.0, v, s, t0);
      lo = 0.0;
    }
    if (std::isfinite(hi)) {
      add_finite(lo, hi, v, s, t0);
    } else {
      // Integrand 1 - Φ(F) = atom_at_one + s * S(x) on the last piece; the
      // domain check guarantees the atom vanishes here.
      parts.positive += s * dist.upper_survival_integral(lo);
    }
  };

  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const double lo = k == 0 ? lower : dist.quantile(pieces[k].start);
    const double hi = k + 1 < pieces.size() ? dist.quantile(pieces[k + 1].start) : top;
    add_region(lo, hi, pieces[k].value, pieces[k].slope, pieces[k].start);
  }
  // F = 1 beyond the support: integrand is -1 on the negative axis.
  if (std::isfinite(top) && top < 0.0) parts.negative -= -top;
  return parts;
}

double risk_choquet_form(const LossDistribution& dist, const DistortionKernel& kernel) {
  return choquet_parts(dist, kernel).total();
}

double cvar(const LossDistribution& dist, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("CVaR level must lie in [0, 1)");
  return risk_quantile_form(dist, DistortionKernel::cvar_at(alpha));
}

}  // namespace riskalloc
