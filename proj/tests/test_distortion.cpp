#include <cmath>
#include <numbers>

#include "doctest.h"
#include "riskalloc/errors.hpp"
#include "riskalloc/risk.hpp"
#include "support/oracles.hpp"

using namespace riskalloc;

namespace {

LossDistribution four_atoms() { return LossDistribution::discrete({1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25}); }

double both_forms(const LossDistribution& d, const DistortionKernel& k) {
  const double q = risk_quantile_form(d, k);
  CHECK(std::abs(q - risk_choquet_form(d, k)) <= 1e-9);
  return q;
}

}  // namespace

TEST_CASE("named kernels have the documented shape") {
  const auto v = DistortionKernel::var_at(0.3);
  CHECK(v(0.2999) == 0.0);
  CHECK(v(0.3) == 1.0);
  CHECK(v.left_limit(0.3) == 0.0);
  REQUIRE(v.jumps().size() == 1);
  CHECK(v.jumps()[0].location == 0.3);

  const auto c = DistortionKernel::cvar_at(0.5);
  CHECK(c(0.5) == 0.0);
  CHECK(c(0.75) == 0.5);
  CHECK(c(1.0) == 1.0);
  CHECK(c.jumps().empty());

  const auto top = DistortionKernel::var_at(1.0);
  CHECK(top.atom_at_one() == 1.0);
  CHECK(top(0.999) == 0.0);

  const auto ph = DistortionKernel::prop_hazard(0.5);
  CHECK(ph.pieces().size() == 1024);
  for (int k = 0; k <= 1024; ++k) {
    const double t = k / 1024.0;
    CHECK(ph(t) == doctest::Approx(1.0 - std::sqrt(1.0 - t)).epsilon(1e-12));
  }

  const DualDistortion g(c);
  CHECK(g(0.0) == 0.0);
  CHECK(g(1.0) == 1.0);
  CHECK(g(0.25) == doctest::Approx(0.5));

  CHECK_THROWS_AS(DistortionKernel::var_at(0.0), PreconditionError);
  CHECK_THROWS_AS(DistortionKernel::cvar_at(1.0), PreconditionError);
  CHECK_THROWS_AS(DistortionKernel::prop_hazard(1.5), PreconditionError);
}

TEST_CASE("kernel points reject invalid shapes") {
  using P = std::vector<std::pair<double, double>>;
  CHECK_THROWS_AS(DistortionKernel::from_points(P{{0, 0}, {0.5, 0.7}, {0.6, 0.4}, {1, 1}}), ValidationError);
  CHECK_THROWS_AS(DistortionKernel::from_points(P{{0, 0.1}, {1, 1}}), ValidationError);
  CHECK_THROWS_AS(DistortionKernel::from_points(P{{0, 0}, {1, 0.9}}), ValidationError);
  CHECK_THROWS_AS(DistortionKernel::from_points(P{{0, 0}, {0.5, 0.2}, {0.4, 0.3}, {1, 1}}), ValidationError);
  const auto jump = DistortionKernel::from_points(P{{0, 0}, {0.5, 0.25}, {0.5, 0.75}, {1, 1}});
  CHECK(jump(0.5) == 0.75);
  CHECK(jump.left_limit(0.5) == 0.25);
  CHECK(!jump.is_convex());
}

TEST_CASE("risk of the four-atom law") {
  const auto d = four_atoms();
  CHECK(both_forms(d, DistortionKernel::cvar_at(0.5)) == 3.5);
  CHECK(cvar(d, 0.5) == 3.5);
  CHECK(cvar(d, 0.0) == expectation(d));
  for (double a : {0.1, 0.25, 0.3, 0.5, 0.51, 0.75, 0.9, 1.0})
    CHECK(both_forms(d, DistortionKernel::var_at(a)) == quantile(d, a));
  CHECK(both_forms(d, DistortionKernel::var_at(1.0)) == 4.0);
  CHECK_THROWS_AS(cvar(d, 1.0), DomainError);
}

TEST_CASE("choquet parts exercise the negative axis") {
  const auto d = LossDistribution::discrete({-1, 1}, {0.5, 0.5});
  const auto parts = choquet_parts(d, DistortionKernel::expectation());
  CHECK(parts.negative == -0.5);
  CHECK(parts.positive == 0.5);
  CHECK(parts.total() == 0.0);
  const auto neg = LossDistribution::discrete({-3, -2}, {0.5, 0.5});
  CHECK(both_forms(neg, DistortionKernel::cvar_at(0.5)) == -2.0);
}

TEST_CASE("point masses and constants are translation invariant") {
  for (double c : {-2.0, 0.0, 5.0, 7.0}) {
    const auto p = LossDistribution::point_mass(c);
    CHECK(both_forms(p, DistortionKernel::cvar_at(0.3)) == doctest::Approx(c).epsilon(1e-15));
    CHECK(both_forms(p, DistortionKernel::var_at(0.5)) == c);
    CHECK(both_forms(p, DistortionKernel::var_at(1.0)) == c);
    CHECK(cvar(p, 0.9) == c);
  }
}

TEST_CASE("exponential closed forms") {
  const auto e = LossDistribution::exponential(1.0);
  CHECK(both_forms(e, DistortionKernel::expectation()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(both_forms(e, DistortionKernel::var_at(0.5)) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  // CVaR_a of Exp(1) is 1 - ln(1 - a).
  CHECK(both_forms(e, DistortionKernel::cvar_at(0.7)) == doctest::Approx(1.0 - std::log(0.3)).epsilon(1e-13));
  // Proportional hazard premium of Exp(1) is 1/r. The 1024-piece grid
  // underweights the top cell, where the quantile is unbounded.
  const auto ph = DistortionKernel::prop_hazard(0.5);
  const double ph_err = 2.0 - both_forms(e, ph);
  CHECK(ph_err > 0.0);
  CHECK(ph_err < 0.035);
  // Bounded support: error at most range * sup |Φ_grid - Φ|.
  const auto u10 = LossDistribution::uniform(0.0, 10.0);
  double sup_gap = 0.0;
  for (int i = 0; i <= 1 << 20; ++i) {
    const double t = i / double(1 << 20);
    sup_gap = std::max(sup_gap, std::abs(ph(t) - (1.0 - std::sqrt(1.0 - t))));
  }
  CHECK(std::abs(both_forms(u10, ph) - 20.0 / 3.0) <= 10.0 * sup_gap);
  CHECK(!in_domain(e, DistortionKernel::var_at(1.0)));
  CHECK_THROWS_AS(risk_quantile_form(e, DistortionKernel::var_at(1.0)), DomainError);
  CHECK_THROWS_AS(risk_choquet_form(e, DistortionKernel::var_at(1.0)), DomainError);
  const auto u = LossDistribution::uniform(0.0, 1.0);
  CHECK(both_forms(u, DistortionKernel::var_at(1.0)) == 1.0);
  CHECK(both_forms(u, DistortionKernel::cvar_at(0.5)) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("convexity and kernel maxima") {
  CHECK(DistortionKernel::cvar_at(0.5).is_convex());
  CHECK(!DistortionKernel::var_at(0.5).is_convex());
  CHECK(DistortionKernel::var_at(1.0).is_convex());
  CHECK(DistortionKernel::expectation().is_convex());
  CHECK(DistortionKernel::prop_hazard(0.3).is_convex());

  const std::vector<DistortionKernel> vars{DistortionKernel::var_at(0.3), DistortionKernel::var_at(0.6)};
  const auto m = max_kernel(vars);
  CHECK(m.same_function(DistortionKernel::var_at(0.3)));
  CHECK(m.jumps().size() == 1);

  const std::vector<DistortionKernel> cvars{DistortionKernel::cvar_at(0.25), DistortionKernel::cvar_at(0.5)};
  const auto mc = max_kernel(cvars);
  for (int k = 0; k <= 200; ++k) {
    const double t = k / 200.0;
    CHECK(mc(t) == doctest::Approx(std::max(cvars[0](t), cvars[1](t))).epsilon(1e-14));
  }
}

// ---- properties ------------------------------------------------------------

TEST_CASE("property: quantile and Choquet forms agree and match the summation oracle") {
  testsupport::Gen gen(21);
  int negative_paths = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 10), -10.0, 10.0);
    const auto k = gen.kernel();
    const double q = risk_quantile_form(d, k);
    const auto parts = choquet_parts(d, k);
    CHECK(std::abs(q - parts.total()) <= 1e-9);
    CHECK(std::abs(q - testsupport::summation_risk(d, k)) <= 1e-9);
    if (d.ess_inf() < 0.0) ++negative_paths;
  }
  CHECK(negative_paths >= 100);
}

TEST_CASE("property: comonotone additivity through pushforward") {
  testsupport::Gen gen(22);
  auto random_fn = [&gen] {
    std::vector<Knot> knots;
    double y = gen.uniform(-1.0, 1.0);
    for (double x : gen.atoms(gen.integer(1, 4), -5.0, 5.0, false)) {
      knots.push_back({x, y});
      y += gen.uniform(0.0, 2.0);
    }
    return PiecewiseMonotoneFn(knots, gen.uniform(0.0, 1.0), gen.uniform(0.0, 1.0));
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 8), -6.0, 6.0);
    const auto k = gen.kernel();
    const auto f = random_fn();
    const auto h = random_fn();
    const double lhs = risk_quantile_form(pushforward(d, f + h), k);
    const double rhs = risk_quantile_form(pushforward(d, f), k) + risk_quantile_form(pushforward(d, h), k);
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("property: positive homogeneity and translation") {
  testsupport::Gen gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 8), -6.0, 6.0);
    const auto k = gen.kernel();
    const double r = risk_quantile_form(d, k);
    const double lam = gen.uniform(0.1, 5.0);
    const double c = gen.uniform(-5.0, 5.0);
    CHECK(std::abs(risk_quantile_form(pushforward(d, PiecewiseMonotoneFn::linear(lam)), k) - lam * r) <= 1e-9);
    CHECK(std::abs(risk_quantile_form(pushforward(d, PiecewiseMonotoneFn::shift(c)), k) - (r + c)) <= 1e-9);
  }
}

TEST_CASE("property: larger kernels give smaller risk for nonnegative losses") {
  testsupport::Gen gen(24);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 8), 0.0, 10.0);
    const auto k1 = gen.kernel();
    const auto k2 = gen.kernel();
    const std::vector<DistortionKernel> pair{k1, k2};
    const auto upper = max_kernel(pair);
    CHECK(risk_quantile_form(d, upper) <= risk_quantile_form(d, k1) + 1e-12);
    CHECK(risk_quantile_form(d, upper) <= risk_quantile_form(d, k2) + 1e-12);
  }
}

TEST_CASE("property: law invariance across representations") {
  testsupport::Gen gen(25);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = gen.integer(1, 6);
    const auto atoms = gen.atoms(m, -5.0, 5.0, true);
    std::vector<double> sample;
    std::vector<double> probs;
    const auto counts = gen.dyadic_probs(m, 16);
    for (int j = 0; j < m; ++j) {
      const int c = static_cast<int>(counts[static_cast<std::size_t>(j)] * 16);
      for (int r = 0; r < c; ++r) sample.push_back(atoms[static_cast<std::size_t>(j)]);
      probs.push_back(counts[static_cast<std::size_t>(j)]);
    }
    const auto a = LossDistribution::discrete(atoms, probs);
    const auto b = LossDistribution::empirical(sample);
    const auto k = gen.kernel();
    CHECK(std::abs(risk_quantile_form(a, k) - risk_quantile_form(b, k)) <= 1e-12);
  }
}

TEST_CASE("property: subadditivity for convex kernels, with a VaR counterexample") {
  testsupport::Gen gen(26);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = gen.integer(2, 8);
    const auto p = gen.random_probs(m);
    std::vector<double> x, y, s;
    for (int j = 0; j < m; ++j) {
      x.push_back(gen.uniform(-5.0, 5.0));
      y.push_back(gen.uniform(-5.0, 5.0));
      s.push_back(x.back() + y.back());
    }
    const auto k = gen.convex_kernel();
    REQUIRE(k.is_convex());
    const double lhs = risk_quantile_form(from_values(s, p), k);
    const double rhs = risk_quantile_form(from_values(x, p), k) + risk_quantile_form(from_values(y, p), k);
    CHECK(lhs <= rhs + 1e-9);
  }
  // Two disjoint losses of probability 0.04 each; VaR at 0.95 ignores each one
  // alone but not their sum.
  const std::vector<double> p{0.04, 0.04, 0.92};
  const std::vector<double> x{1, 0, 0}, y{0, 1, 0}, s{1, 1, 0};
  const auto v = DistortionKernel::var_at(0.95);
  CHECK(risk_quantile_form(from_values(x, p), v) == 0.0);
  CHECK(risk_quantile_form(from_values(y, p), v) == 0.0);
  CHECK(risk_quantile_form(from_values(s, p), v) == 1.0);
}
