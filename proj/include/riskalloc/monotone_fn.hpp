#pragma once

#include <span>
#include <utility>
#include <vector>

namespace riskalloc {

struct Knot {
  double x;
  double y;
  bool operator==(const Knot&) const = default;
};

// Continuous piecewise-linear function on the real line: linear
// interpolation between knots, linear extrapolation with `left_slope`
// below the first knot and `right_slope` beyond the last.
//
// The general type only requires strictly ascending knot abscissae; use
// is_nondecreasing() / is_allocation_component() to check the stronger
// properties a given use needs.
class PiecewiseMonotoneFn {
 public:
  PiecewiseMonotoneFn(std::vector<Knot> knots, double left_slope, double right_slope);

  static PiecewiseMonotoneFn identity();
  static PiecewiseMonotoneFn linear(double slope);      // x -> slope * x
  static PiecewiseMonotoneFn constant(double value);
  static PiecewiseMonotoneFn shift(double c);           // x -> x + c
  static PiecewiseMonotoneFn cap(double m);             // x -> min(x, m)
  static PiecewiseMonotoneFn excess_over(double m);     // x -> max(x - m, 0)
  static PiecewiseMonotoneFn layer(double lower, double upper);  // min(max(x-lower,0), upper-lower)

  double operator()(double x) const;

  // Slope on the segment right of x (the right derivative).
  double slope_right_of(double x) const;

  const std::vector<Knot>& knots() const noexcept { return knots_; }
  double left_slope() const noexcept { return left_slope_; }
  double right_slope() const noexcept { return right_slope_; }

  bool is_nondecreasing(double tol = 0.0) const;

  // f(0) = 0 and 0 <= f(y) - f(x) <= y - x.
  bool is_allocation_component(double tol = 1e-12) const;

  // Drops knots that sit on a straight line through their neighbours.
  PiecewiseMonotoneFn simplified(double tol = 0.0) const;

  // x -> (*this)(inner(x)). Requires inner to be non-decreasing.
  PiecewiseMonotoneFn compose(const PiecewiseMonotoneFn& inner) const;

  friend PiecewiseMonotoneFn operator+(const PiecewiseMonotoneFn& a, const PiecewiseMonotoneFn& b);
  friend PiecewiseMonotoneFn operator-(const PiecewiseMonotoneFn& a, const PiecewiseMonotoneFn& b);
  friend PiecewiseMonotoneFn operator*(double s, const PiecewiseMonotoneFn& f);

  bool operator==(const PiecewiseMonotoneFn&) const = default;

 private:
  std::vector<Knot> knots_;
  double left_slope_;
  double right_slope_;
};

// Sum of several functions, knots merged.
PiecewiseMonotoneFn sum(std::span<const PiecewiseMonotoneFn> fs);

}  // namespace riskalloc
