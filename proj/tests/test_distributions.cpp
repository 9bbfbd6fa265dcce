#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "riskalloc/distribution.hpp"
#include "riskalloc/errors.hpp"
#include "support/oracles.hpp"

using namespace riskalloc;

namespace {

LossDistribution four_atoms() { return LossDistribution::discrete({1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25}); }

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("cdf of a four-atom law counts atoms at or below x") {
  const auto d = four_atoms();
  CHECK(cdf(d, 2.5) == 0.5);
  CHECK(cdf(d, 2.0) == 0.5);
  CHECK(cdf(d, -1.0) == 0.0);
  CHECK(cdf(d, 4.0) == 1.0);
  CHECK(cdf(LossDistribution::exponential(1.0), std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cdf(LossDistribution::exponential(1.0), -1.0) == 0.0);
}

TEST_CASE("lower quantile picks the smallest x with F(x) >= t") {
  const auto d = four_atoms();
  CHECK(quantile(d, 0.5) == 2.0);
  CHECK(quantile(d, 0.51) == 3.0);
  CHECK(quantile(d, 0.25) == 1.0);
  CHECK(quantile(d, 1.0) == 4.0);
  CHECK(quantile(LossDistribution::exponential(1.0), 0.5) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK_THROWS_AS(quantile(d, 0.0), DomainError);
  CHECK_THROWS_AS(quantile(d, 1.5), DomainError);
  CHECK_THROWS_AS(quantile(d, -0.1), DomainError);
}

TEST_CASE("expectation of discrete, empirical and exponential laws") {
  CHECK(expectation(four_atoms()) == 2.5);
  CHECK(expectation(LossDistribution::exponential(1.0)) == 1.0);
  CHECK(expectation(LossDistribution::empirical({0, 0, 10})) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(expectation(LossDistribution::uniform(2.0, 6.0)) == 4.0);
}

TEST_CASE("truncation collapses the upper mass onto the cap") {
  const auto t = truncate(four_atoms(), 3.0);
  REQUIRE(t.atoms().size() == 3);
  CHECK(t.atoms()[2] == 3.0);
  CHECK(t.probs()[0] == 0.25);
  CHECK(t.probs()[2] == 0.5);

  const auto same = truncate(four_atoms(), 10.0);
  CHECK(same.atoms().size() == 4);
  CHECK(expectation(same) == 2.5);

  SUBCASE("exponential keeps an exact atom at the cap") {
    const auto e = truncate(LossDistribution::exponential(1.0), 0.5);
    CHECK(e.ess_sup() == 0.5);
    CHECK(cdf(e, 0.5) == 1.0);
    CHECK(e.cdf_left(0.5) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-15));
    CHECK(cdf(e, 0.25) == doctest::Approx(1.0 - std::exp(-0.25)).epsilon(1e-15));
    // E[min(X, m)] = 1 - e^{-m}
    CHECK(expectation(e) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(truncate(four_atoms(), 1.0), PreconditionError);
}

TEST_CASE("pushforward by identity, cap and constant maps") {
  const auto d = four_atoms();
  const auto id = pushforward(d, PiecewiseMonotoneFn::identity());
  CHECK(std::equal(id.atoms().begin(), id.atoms().end(), d.atoms().begin()));

  const auto capped = pushforward(d, PiecewiseMonotoneFn::cap(3.0));
  REQUIRE(capped.atoms().size() == 3);
  CHECK(capped.probs()[2] == 0.5);

  const auto zero = pushforward(d, PiecewiseMonotoneFn::constant(0.0));
  REQUIRE(zero.atoms().size() == 1);
  CHECK(zero.atoms()[0] == 0.0);

  const auto e = LossDistribution::exponential(1.0);
  CHECK(pushforward(e, PiecewiseMonotoneFn::identity()).kind() == DistributionKind::exponential);
  CHECK(pushforward(e, PiecewiseMonotoneFn::constant(0.0)).kind() == DistributionKind::discrete);
  CHECK_THROWS_AS(pushforward(d, PiecewiseMonotoneFn::linear(-1.0)), PreconditionError);
}

TEST_CASE("csv ingestion sorts rows and reports bad rows") {
  const auto ok = ingest_csv(write_temp("riskalloc_rows.csv", "loss\n3\n1\n2\n"));
  REQUIRE(ok.kind() == DistributionKind::empirical);
  CHECK(ok.sample_values()[0] == 1.0);
  CHECK(ok.sample_values()[2] == 3.0);

  CHECK_THROWS_AS(ingest_csv(write_temp("riskalloc_empty.csv", "")), ParseError);
  CHECK_THROWS_AS(ingest_csv(write_temp("riskalloc_header_only.csv", "loss\n")), ParseError);
  try {
    ingest_csv(write_temp("riskalloc_bad.csv", "loss\n1\nabc\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(ingest_csv(write_temp("riskalloc_header.csv", "value\n1\n")), ParseError);
}

TEST_CASE("sampling is deterministic given the seed") {
  const auto e = LossDistribution::exponential(1.0);
  const auto a = draw(e, 4, 7);
  const auto b = draw(e, 4, 7);
  CHECK(a == b);
  CHECK(draw(e, 4, 8) != a);
  const auto s = sample(e, 4, 7);
  CHECK(s.kind() == DistributionKind::empirical);
  CHECK(std::is_sorted(s.sample_values().begin(), s.sample_values().end()));
}

TEST_CASE("ties in empirical samples merge into weighted atoms") {
  const auto d = LossDistribution::empirical({2, 1, 2, 2});
  REQUIRE(d.atoms().size() == 2);
  CHECK(d.probs()[1] == 0.75);
}

TEST_CASE("invalid discrete laws are rejected") {
  CHECK_THROWS_AS(LossDistribution::discrete({1, 2}, {0.5, 0.6}), PreconditionError);
  CHECK_THROWS_AS(LossDistribution::discrete({1, 2}, {1.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(LossDistribution::discrete({}, {}), PreconditionError);
  CHECK_THROWS_AS(LossDistribution::uniform(1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(LossDistribution::exponential(0.0), PreconditionError);
}

// ---- properties ------------------------------------------------------------

TEST_CASE("property: quantile and cdf form a Galois pair") {
  testsupport::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 10), -5.0, 5.0);
    for (int k = 1; k <= 64; ++k) {
      const double t = k / 64.0;
      const double q = quantile(d, t);
      CHECK(cdf(d, q) >= t);
      CHECK(d.cdf_left(q) < t);
    }
  }
  const auto e = LossDistribution::exponential(0.7);
  for (int k = 1; k < 64; ++k) {
    const double t = k / 64.0;
    CHECK(cdf(e, quantile(e, t)) == doctest::Approx(t).epsilon(1e-14));
  }
}

TEST_CASE("property: quantiles commute with non-decreasing continuous maps") {
  testsupport::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(1, 8), -4.0, 4.0);
    std::vector<Knot> knots;
    double y = gen.uniform(-1.0, 1.0);
    for (double x : gen.atoms(gen.integer(1, 4), -5.0, 5.0, false)) {
      knots.push_back({x, y});
      y += gen.coin() ? 0.0 : gen.uniform(0.0, 2.0);
    }
    const PiecewiseMonotoneFn f(knots, gen.coin() ? 0.0 : 0.5, gen.coin() ? 0.0 : 1.5);
    const auto pushed = pushforward(d, f);
    for (int k = 1; k <= 32; ++k) {
      const double t = k / 32.0;
      CHECK(std::abs(quantile(pushed, t) - f(quantile(d, t))) <= 1e-12);
    }
  }
}

TEST_CASE("property: quantiles of transformed continuous laws commute with the map") {
  const auto e = LossDistribution::exponential(1.3);
  const PiecewiseMonotoneFn f({{0.2, 0.0}, {0.8, 0.3}, {1.5, 0.3}}, 0.0, 0.5);
  const auto pushed = pushforward(e, f);
  for (int k = 1; k < 40; ++k) {
    const double t = k / 40.0;
    CHECK(std::abs(quantile(pushed, t) - f(quantile(e, t))) <= 1e-12);
  }
  // Flat piece of the map becomes an atom at 0.3 of mass F(1.5) - F(0.8).
  CHECK(pushed.cdf(0.3) - pushed.cdf_left(0.3) == doctest::Approx(std::exp(-1.3 * 0.8) - std::exp(-1.3 * 1.5)));
}

TEST_CASE("property: truncation lowers the mean unless the cap is above the support") {
  testsupport::Gen gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = gen.discrete(gen.integer(2, 10), 0.0, 10.0);
    const double m = gen.uniform(d.atoms()[0] + 1e-6, 12.0);
    const double et = expectation(truncate(d, m));
    if (m >= d.ess_sup())
      CHECK(et == expectation(d));
    else
      CHECK(et < expectation(d));
  }
}

TEST_CASE("closed-form integrals agree with quadrature") {
  using testsupport::simpson;
  const auto e = LossDistribution::exponential(1.7);
  CHECK(e.cdf_integral(0.3, 2.1) == doctest::Approx(simpson([&](double x) { return e.cdf(x); }, 0.3, 2.1)).epsilon(1e-12));
  CHECK(e.quantile_integral(0.2, 0.9) ==
        doctest::Approx(simpson([&](double t) { return e.quantile(t); }, 0.2, 0.9)).epsilon(1e-12));
  CHECK(e.upper_survival_integral(0.4) ==
        doctest::Approx(simpson([&](double x) { return e.survival(x); }, 0.4, 40.0)).epsilon(1e-12));
  const auto u = LossDistribution::uniform(-1.0, 3.0);
  CHECK(u.cdf_integral(-2.0, 1.0) == doctest::Approx(simpson([&](double x) { return u.cdf(x); }, -1.0, 1.0)).epsilon(1e-12));
  CHECK(u.quantile_integral(0.1, 0.6) ==
        doctest::Approx(simpson([&](double t) { return u.quantile(t); }, 0.1, 0.6)).epsilon(1e-12));
  const auto tr = truncate(e, 1.0);
  CHECK(tr.quantile_integral(0.0, 1.0) ==
        doctest::Approx(simpson([&](double t) { return std::min(e.quantile(std::max(t, 1e-300)), 1.0); }, 0.0, 1.0, 200000))
            .epsilon(1e-9));
}
