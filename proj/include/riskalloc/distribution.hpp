#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskalloc/monotone_fn.hpp"

namespace riskalloc {

enum class DistributionKind { empirical, discrete, uniform, exponential, transformed };

namespace detail {
struct UniformLaw {
  double lower;
  double upper;
};
struct ExponentialLaw {
  double rate;
};
}  // namespace detail

// Law of a real loss variable.
//
// Discrete laws (empirical samples and explicit atoms) are stored as merged,
// strictly ascending atoms with positive probabilities. Continuous laws are
// a Uniform or Exponential base, optionally pushed through a continuous
// non-decreasing piecewise-linear map; that keeps truncations and allocation
// components of a continuous loss exact (a flat piece of the map becomes an
// atom).
//
// Quantiles are lower quantiles, quantile(t) = inf{x : F(x) >= t}.
class LossDistribution {
 public:
  static LossDistribution discrete(std::vector<double> atoms, std::vector<double> probs);
  static LossDistribution empirical(std::vector<double> sample);
  static LossDistribution point_mass(double value);
  static LossDistribution uniform(double lower, double upper);
  static LossDistribution exponential(double rate);

  DistributionKind kind() const noexcept;
  bool is_discrete() const noexcept;
  bool is_nonnegative() const { return ess_inf() >= 0.0; }

  double cdf(double x) const;
  double cdf_left(double x) const;  // P(X < x)
  double survival(double x) const { return 1.0 - cdf(x); }
  double quantile(double t) const;
  double expectation() const;
  double ess_inf() const;
  double ess_sup() const;  // may be +inf

  // Integral of the quantile function over [a, b] within [0, 1].
  double quantile_integral(double a, double b) const;
  // Integral of the CDF over a finite interval [x1, x2].
  double cdf_integral(double x1, double x2) const;
  // Integral of the survival function over [x, +inf).
  double upper_survival_integral(double x) const;

  // Discrete laws only.
  std::span<const double> atoms() const;
  std::span<const double> probs() const;
  // Empirical laws only: the sorted sample.
  std::span<const double> sample_values() const;

  // Continuous laws: the distribution parameters, for reporting.
  std::string describe() const;

  // Composition with a non-decreasing continuous map (law of f(X)).
  LossDistribution pushforward(const PiecewiseMonotoneFn& f) const;

 private:
  struct Discrete {
    std::vector<double> atoms;
    std::vector<double> probs;
    std::vector<double> cum;  // cum.back() == 1 exactly
    std::vector<double> sample;  // non-empty for empirical laws
  };
  using Uniform = detail::UniformLaw;
  using Exponential = detail::ExponentialLaw;
  using Continuous = std::variant<Uniform, Exponential>;
  struct Segment {  // f(x) = y0 + slope * (x - x0) on [x0, x1]
    double x0, x1, y0, y1, slope;
  };
  struct Transformed {
    Continuous base;
    PiecewiseMonotoneFn f;
    std::vector<Segment> segments;
  };

  using Rep = std::variant<Discrete, Uniform, Exponential, Transformed>;
  explicit LossDistribution(Rep rep) : rep_(std::move(rep)) {}

  static LossDistribution from_transformed(const Continuous& base, const PiecewiseMonotoneFn& f);
  static LossDistribution merged_discrete(std::vector<std::pair<double, double>> weighted, std::vector<double> sample);

  Rep rep_;
};

double cdf(const LossDistribution& dist, double x);
double quantile(const LossDistribution& dist, double t);
double expectation(const LossDistribution& dist);

// Law of min(X, m). Requires m > ess_inf.
LossDistribution truncate(const LossDistribution& dist, double m);

// Law of f(X) for non-decreasing continuous f.
LossDistribution pushforward(const LossDistribution& dist, const PiecewiseMonotoneFn& f);

// Law of a value vector on a finite probability space (ties merged).
LossDistribution from_values(std::span<const double> values, std::span<const double> probs);

// Reads a CSV with a single `loss` column and header into an empirical law.
LossDistribution ingest_csv(const std::filesystem::path& path);

// n i.i.d. draws by inverse transform; deterministic given seed.
LossDistribution sample(const LossDistribution& dist, std::size_t n, std::uint64_t seed);
std::vector<double> draw(const LossDistribution& dist, std::size_t n, std::uint64_t seed);

}  // namespace riskalloc
