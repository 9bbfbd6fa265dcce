#include <cmath>

#include "doctest.h"
#include "riskalloc/allocation.hpp"
#include "riskalloc/duality.hpp"
#include "riskalloc/risk.hpp"
#include "riskalloc/simplex.hpp"
#include "support/oracles.hpp"

using namespace riskalloc;

namespace {

const FiniteSpace kUniform4({0.25, 0.25, 0.25, 0.25});
const std::vector<double> kX4{1, 2, 3, 4};

std::vector<AgentSpec> pair_of(const DistortionKernel& a, const DistortionKernel& b, double wa = 1.0, double wb = 1.0) {
  return {{a, wa}, {b, wb}};
}

// Brute-force LP oracle for 2 variables: best objective over all pairwise
// intersections of constraint boundaries (including the axes).
double vertex_oracle_2d(const LinearProgram& lp) {
  std::vector<std::array<double, 3>> lines;  // a x + b y = c
  for (const auto& r : lp.rows) lines.push_back({r.coeffs[0], r.coeffs[1], r.rhs});
  lines.push_back({1, 0, 0});
  lines.push_back({0, 1, 0});
  double best = -INFINITY;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t k = i + 1; k < lines.size(); ++k) {
      const auto& a = lines[i];
      const auto& b = lines[k];
      const double det = a[0] * b[1] - a[1] * b[0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (a[2] * b[1] - a[1] * b[2]) / det;
      const double y = (a[0] * b[2] - a[2] * b[0]) / det;
      if (x < -1e-9 || y < -1e-9) continue;
      bool ok = true;
      for (const auto& r : lp.rows) {
        const double v = r.coeffs[0] * x + r.coeffs[1] * y;
        if (r.sense == RowSense::less_equal && v > r.rhs + 1e-9) ok = false;
        if (r.sense == RowSense::greater_equal && v < r.rhs - 1e-9) ok = false;
        if (r.sense == RowSense::equal && std::abs(v - r.rhs) > 1e-9) ok = false;
      }
      if (ok) best = std::max(best, lp.objective[0] * x + lp.objective[1] * y);
    }
  return best;
}

}  // namespace

TEST_CASE("simplex solves small programs") {
  LinearProgram lp;
  lp.objective = {3, 2};
  lp.add_row({1, 1}, RowSense::less_equal, 4);
  lp.add_row({1, 3}, RowSense::less_equal, 6);
  lp.add_row({1, 0}, RowSense::less_equal, 3);
  auto r = solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(11.0));

  LinearProgram eq;
  eq.objective = {1, -1};
  eq.add_row({1, 1}, RowSense::equal, 2);
  eq.add_row({1, -1}, RowSense::greater_equal, -1);
  eq.add_row({1, 0}, RowSense::less_equal, 1.5);
  r = solve(eq);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(1.0));

  LinearProgram bad;
  bad.objective = {1, 1};
  bad.add_row({1, 1}, RowSense::less_equal, 1);
  bad.add_row({1, 1}, RowSense::greater_equal, 2);
  CHECK(solve(bad).status == LpStatus::infeasible);

  LinearProgram open;
  open.objective = {1, 0};
  open.add_row({0, 1}, RowSense::less_equal, 1);
  CHECK(solve(open).status == LpStatus::unbounded);
}

TEST_CASE("property: simplex matches vertex enumeration") {
  testsupport::Gen gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    lp.objective = {gen.uniform(-2, 2), gen.uniform(-2, 2)};
    lp.add_row({1, 1}, RowSense::less_equal, gen.uniform(1, 5));  // keeps the region bounded
    const int extra = gen.integer(0, 4);
    for (int k = 0; k < extra; ++k) {
      const int s = gen.integer(0, 2);
      lp.add_row({gen.uniform(-2, 2), gen.uniform(-2, 2)},
                 s == 0 ? RowSense::less_equal : s == 1 ? RowSense::greater_equal : RowSense::equal, gen.uniform(-1, 2));
    }
    const double oracle = vertex_oracle_2d(lp);
    const auto r = solve(lp);
    if (std::isinf(oracle)) {
      CHECK(r.status == LpStatus::infeasible);
    } else {
      REQUIRE(r.status == LpStatus::optimal);
      CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("scenario set of the expectation kernel is the base measure") {
  const FiniteSpace space({0.1, 0.2, 0.3, 0.4});
  const ScenarioSet set(DistortionKernel::expectation(), space);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  CHECK(set.contains(p));
  CHECK(!set.contains(std::vector<double>{0.2, 0.1, 0.3, 0.4}));
  const std::vector<ScenarioSet> sets{set};
  const std::vector<double> w{1.0};
  const auto feas = intersection_feasible(sets, w);
  REQUIRE(feas.feasible);
  for (std::size_t j = 0; j < 4; ++j) CHECK(feas.point[j] == doctest::Approx(p[j]).epsilon(1e-12));
  const std::vector<double> x{5, -1, 2, 7};
  CHECK(support_value(sets, w, x).value == doctest::Approx(0.5 - 0.2 + 0.6 + 2.8).epsilon(1e-12));
}

TEST_CASE("CVaR scenario sets reduce to box constraints") {
  testsupport::Gen gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto probs = gen.random_probs(3);
    const FiniteSpace space(probs);
    const double alpha = gen.uniform(0.0, 0.9);
    const ScenarioSet set(DistortionKernel::cvar_at(alpha), space);
    for (int a = 0; a <= 40; ++a)
      for (int b = 0; a + b <= 40; ++b) {
        const std::vector<double> q{a / 40.0, b / 40.0, 1.0 - a / 40.0 - b / 40.0};
        bool box = true;
        for (std::size_t j = 0; j < 3; ++j) box = box && q[j] <= probs[j] / (1.0 - alpha) + 1e-9;
        CHECK(set.contains(q, 1.0, 1e-9) == box);
      }
  }
}

TEST_CASE("a one-atom space has the single scenario 1") {
  const FiniteSpace space({1.0});
  const ScenarioSet set(DistortionKernel::cvar_at(0.4), space);
  CHECK(set.contains(std::vector<double>{1.0}));
  CHECK(!set.contains(std::vector<double>{0.9}));
}

TEST_CASE("scenario sets require convex kernels") {
  CHECK_THROWS_AS(ScenarioSet(DistortionKernel::var_at(0.5), kUniform4), PreconditionError);
  CHECK_THROWS_AS(FiniteSpace(std::vector<double>(13, 1.0 / 13)), PreconditionError);
}

TEST_CASE("intersection feasibility") {
  const std::vector<ScenarioSet> cvars{ScenarioSet(DistortionKernel::cvar_at(0.25), kUniform4),
                                       ScenarioSet(DistortionKernel::cvar_at(0.5), kUniform4)};
  const std::vector<double> equal{1.0, 1.0};
  const auto ok = intersection_feasible(cvars, equal);
  REQUIRE(ok.feasible);
  for (const auto& s : cvars) {
    CHECK(s.contains(ok.point));
    CHECK(s.contains(std::vector<double>(kUniform4.probs().begin(), kUniform4.probs().end())));
  }
  const std::vector<ScenarioSet> means{ScenarioSet(DistortionKernel::expectation(), kUniform4),
                                       ScenarioSet(DistortionKernel::expectation(), kUniform4)};
  const std::vector<double> unequal{1.0, 2.0};
  const auto bad = intersection_feasible(means, unequal);
  CHECK(!bad.feasible);
  CHECK(bad.witness.find("total mass") != std::string::npos);
  CHECK_THROWS_AS(support_value(means, unequal, kX4), InfeasibleIntersection);
}

TEST_CASE("support values") {
  const std::vector<ScenarioSet> twin{ScenarioSet(DistortionKernel::cvar_at(0.5), kUniform4),
                                      ScenarioSet(DistortionKernel::cvar_at(0.5), kUniform4)};
  const std::vector<double> w{1.0, 1.0};
  CHECK(support_value(twin, w, kX4).value == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(support_value(twin, w, std::vector<double>{2, 2, 2, 2}).value == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<ScenarioSet> mixed{ScenarioSet(DistortionKernel::cvar_at(0.25), kUniform4),
                                       ScenarioSet(DistortionKernel::cvar_at(0.5), kUniform4)};
  const MarketProblem prob(pair_of(DistortionKernel::cvar_at(0.25), DistortionKernel::cvar_at(0.5)),
                           LossDistribution::discrete(kX4, {0.25, 0.25, 0.25, 0.25}));
  CHECK(std::abs(support_value(mixed, w, kX4).value - optimal_value(prob)) <= 1e-6);
}

TEST_CASE("property: support over one scenario set reproduces the risk") {
  testsupport::Gen gen(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = gen.integer(1, 8);
    const FiniteSpace space(gen.random_probs(m));
    const auto k = gen.convex_kernel();
    const std::vector<ScenarioSet> sets{ScenarioSet(k, space)};
    const std::vector<double> w{1.0};
    std::vector<double> x;
    for (int j = 0; j < m; ++j) x.push_back(gen.uniform(-10, 10));
    const auto sup = support_value(sets, w, x);
    CHECK(std::abs(sup.value - risk_on_space(k, space, x)) <= 1e-9);
    CHECK(sets[0].contains(sup.maximizer));
  }
}

TEST_CASE("property: support value equals the comonotone optimum for convex agents") {
  testsupport::Gen gen(44);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = gen.integer(1, 8);
    const auto probs = gen.random_probs(m);
    const FiniteSpace space(probs);
    const auto x = gen.atoms(m, 0.0, 10.0, false);
    const int n = gen.integer(1, 3);
    std::vector<AgentSpec> agents;
    std::vector<ScenarioSet> sets;
    const double lambda = gen.uniform(0.5, 2.0);
    for (int i = 0; i < n; ++i) {
      agents.push_back({gen.convex_kernel(), lambda});
      sets.emplace_back(agents.back().kernel, space);
    }
    const std::vector<double> w(static_cast<std::size_t>(n), lambda);
    const MarketProblem prob(agents, LossDistribution::discrete(x, probs));
    CHECK(std::abs(support_value(sets, w, x).value - optimal_value(prob)) <= 1e-6);
  }
}

TEST_CASE("attainability witnesses") {
  const auto c1 = DistortionKernel::cvar_at(0.25);
  const auto c2 = DistortionKernel::cvar_at(0.5);
  const std::vector<AgentSpec> single{{c1, 1.0}};
  const std::vector<std::vector<double>> whole{kX4};
  CHECK(attainability_witness(single, kUniform4, whole).has_value());

  const auto agents = pair_of(c1, c2);
  const MarketProblem prob(agents, LossDistribution::discrete(kX4, {0.25, 0.25, 0.25, 0.25}));
  const auto alloc = optimal_allocation(prob);
  std::vector<std::vector<double>> vectors(2);
  for (double x : kX4)
    for (std::size_t i = 0; i < 2; ++i) vectors[i].push_back(alloc.components[i](x));
  const auto w = attainability_witness(agents, kUniform4, vectors);
  REQUIRE(w.has_value());
  for (std::size_t j = 0; j < 4; ++j) CHECK(w->density[j] == doctest::Approx(w->measure[j] / 0.25));

  // Swapping the layers is strictly worse, so no scenario can price it.
  std::vector<std::vector<double>> swapped{vectors[1], vectors[0]};
  double swapped_value = 0.0;
  for (std::size_t i = 0; i < 2; ++i) swapped_value += risk_on_space(agents[i].kernel, kUniform4, swapped[i]);
  REQUIRE(swapped_value > optimal_value(prob) + 1e-9);
  CHECK(!attainability_witness(agents, kUniform4, swapped).has_value());
}

TEST_CASE("cash-transfer certificates") {
  const auto e = DistortionKernel::expectation();
  const auto c = DistortionKernel::cvar_at(0.5);
  auto cert = cash_transfer_certificate(pair_of(e, c, 1.0, 2.0), kUniform4, kX4);
  REQUIRE(cert.has_value());
  CHECK(cert->slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cert->direction[0][0] == 1.0);
  CHECK(cert->direction[1][0] == -1.0);
  CHECK(verify_certificate(pair_of(e, c, 1.0, 2.0), kUniform4, *cert));

  const std::vector<AgentSpec> three{{e, 1.0}, {c, 1.0}, {e, 1.0}};
  CHECK(!cash_transfer_certificate(three, kUniform4, kX4).has_value());

  cert = cash_transfer_certificate(pair_of(e, c, 2.0, 1.0), kUniform4, kX4);
  REQUIRE(cert.has_value());
  CHECK(cert->slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cert->direction[1][0] == 1.0);
  CHECK(cert->direction[0][0] == -1.0);
}

TEST_CASE("VaR-mean certificates") {
  auto cert = var_mean_certificate(kUniform4, 0.7, kX4);
  REQUIRE(cert.has_value());
  CHECK(cert->slope == -0.25);
  const auto agents = pair_of(DistortionKernel::var_at(0.7), DistortionKernel::expectation());
  CHECK(verify_certificate(agents, kUniform4, *cert));
  CHECK(cert->verification[1] - cert->verification[0] == doctest::Approx(9 * -0.25).epsilon(1e-12));

  CHECK(!var_mean_certificate(FiniteSpace({0.5, 0.5}), 0.7, std::vector<double>{1, 2}).has_value());

  // Small alpha: the largest event with P(A) <= 1 - alpha is used.
  cert = var_mean_certificate(kUniform4, 0.01, kX4);
  REQUIRE(cert.has_value());
  CHECK(cert->slope == -0.75);
  CHECK(verify_certificate(pair_of(DistortionKernel::var_at(0.01), DistortionKernel::expectation()), kUniform4, *cert));
  CHECK_THROWS_AS(var_mean_certificate(kUniform4, 0.0, kX4), PreconditionError);
}

TEST_CASE("randomized search") {
  const auto ve = pair_of(DistortionKernel::var_at(0.7), DistortionKernel::expectation());
  const auto hit = randomized_certificate_search(ve, kUniform4, kX4, 10000, 0);
  REQUIRE(hit.has_value());
  CHECK(verify_certificate(ve, kUniform4, *hit));
  const auto again = randomized_certificate_search(ve, kUniform4, kX4, 10000, 0);
  REQUIRE(again.has_value());
  CHECK(again->iteration == hit->iteration);
  CHECK(again->direction == hit->direction);

  const auto ee = pair_of(DistortionKernel::expectation(), DistortionKernel::expectation());
  CHECK(!randomized_certificate_search(ee, kUniform4, kX4, 2000, 1).has_value());
  const auto cc = pair_of(DistortionKernel::cvar_at(0.5), DistortionKernel::cvar_at(0.5));
  CHECK(!randomized_certificate_search(cc, kUniform4, kX4, 2000, 1).has_value());
}

TEST_CASE("indicator-pair search recovers the VaR-mean slope") {
  const auto ve = pair_of(DistortionKernel::var_at(0.7), DistortionKernel::expectation());
  const auto cert = indicator_pair_certificate(ve, kUniform4, kX4);
  REQUIRE(cert.has_value());
  CHECK(cert->slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(verify_certificate(ve, kUniform4, *cert));
  const auto cc = pair_of(DistortionKernel::cvar_at(0.5), DistortionKernel::cvar_at(0.2));
  CHECK(!indicator_pair_certificate(cc, kUniform4, kX4).has_value());
}

TEST_CASE("property: certificates survive a change of total") {
  testsupport::Gen gen(45);
  const auto ve = pair_of(DistortionKernel::var_at(0.7), DistortionKernel::expectation());
  const auto certs = {*var_mean_certificate(kUniform4, 0.7, kX4), *indicator_pair_certificate(ve, kUniform4, kX4),
                      *randomized_certificate_search(ve, kUniform4, kX4, 10000, 3)};
  for (const auto& cert : certs) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x;
      for (int j = 0; j < 4; ++j) x.push_back(gen.uniform(-20, 20));
      const auto moved = rebase(cert, ve, kUniform4, x);
      CHECK(moved.slope == doctest::Approx(cert.slope).epsilon(1e-12));
      CHECK(verify_certificate(ve, kUniform4, moved));
      for (std::size_t j = 0; j < 4; ++j) CHECK(moved.base[0][j] + moved.base[1][j] == doctest::Approx(x[j]).epsilon(1e-12));
    }
  }
  // Cash transfer with random agents.
  for (int trial = 0; trial < 50; ++trial) {
    const auto agents = pair_of(gen.kernel(), gen.kernel(), gen.uniform(0.5, 2), gen.uniform(0.5, 2));
    const auto cert = cash_transfer_certificate(agents, kUniform4, kX4);
    REQUIRE(cert.has_value());
    CHECK(verify_certificate(agents, kUniform4, *cert));
    const auto moved = rebase(*cert, agents, kUniform4, std::vector<double>{9, -3, 0, 1});
    CHECK(moved.slope == doctest::Approx(cert->slope).epsilon(1e-12));
    CHECK(verify_certificate(agents, kUniform4, moved));
  }
}
