#pragma once

#include "riskalloc/distribution.hpp"
#include "riskalloc/kernel.hpp"

namespace riskalloc {

// True when the quantile integral of `dist` against `kernel` is finite.
// For the supported families the only divergence is an atom of the kernel
// at level 1 combined with an unbounded upper tail.
bool in_domain(const LossDistribution& dist, const DistortionKernel& kernel);

// Integral of the lower quantile against dΦ. An atom of Φ at t contributes
// its mass times quantile(t); an atom at 1 contributes mass times ess_sup.
double risk_quantile_form(const LossDistribution& dist, const DistortionKernel& kernel);

struct ChoquetParts {
  double negative;  // integral over (-inf, 0) of g(S(x)) - 1
  double positive;  // integral over [0, inf) of g(S(x))
  double total() const { return negative + positive; }
};

// Choquet form, evaluated region by region: on {x : F(x) in [t_k, t_k+1)}
// the integrand is affine in F(x), so each region reduces to a CDF integral.
ChoquetParts choquet_parts(const LossDistribution& dist, const DistortionKernel& kernel);
double risk_choquet_form(const LossDistribution& dist, const DistortionKernel& kernel);

// Conditional value at risk at level alpha in [0, 1).
double cvar(const LossDistribution& dist, double alpha);

}  // namespace riskalloc
