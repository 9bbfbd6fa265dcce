#include "riskalloc/monotone_fn.hpp"

#include <algorithm>
#include <cmath>

#include "riskalloc/errors.hpp"

namespace riskalloc {

PiecewiseMonotoneFn::PiecewiseMonotoneFn(std::vector<Knot> knots, double left_slope, double right_slope)
    : knots_(std::move(knots)), left_slope_(left_slope), right_slope_(right_slope) {
  if (knots_.empty()) throw ValidationError("piecewise function needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].x) || !std::isfinite(knots_[i].y))
      throw ValidationError("piecewise function knots must be finite");
    if (i > 0 && !(knots_[i].x > knots_[i - 1].x))
      throw ValidationError("piecewise function knot abscissae must be strictly ascending");
  }
  if (!std::isfinite(left_slope_) || !std::isfinite(right_slope_))
    throw ValidationError("piecewise function slopes must be finite");
}

PiecewiseMonotoneFn PiecewiseMonotoneFn::identity() { return {{{0.0, 0.0}}, 1.0, 1.0}; }
PiecewiseMonotoneFn PiecewiseMonotoneFn::linear(double slope) { return {{{0.0, 0.0}}, slope, slope}; }
PiecewiseMonotoneFn PiecewiseMonotoneFn::constant(double value) { return {{{0.0, value}}, 0.0, 0.0}; }
PiecewiseMonotoneFn PiecewiseMonotoneFn::shift(double c) { return {{{0.0, c}}, 1.0, 1.0}; }
PiecewiseMonotoneFn PiecewiseMonotoneFn::cap(double m) { return {{{m, m}}, 1.0, 0.0}; }
PiecewiseMonotoneFn PiecewiseMonotoneFn::excess_over(double m) { return {{{m, 0.0}}, 0.0, 1.0}; }

PiecewiseMonotoneFn PiecewiseMonotoneFn::layer(double lower, double upper) {
  if (!(upper > lower)) throw PreconditionError("layer requires upper > lower");
  return {{{lower, 0.0}, {upper, upper - lower}}, 0.0, 0.0};
}

double PiecewiseMonotoneFn::operator()(double x) const {
  if (x <= knots_.front().x) {
    const double dx = x - knots_.front().x;
    return dx == 0.0 || left_slope_ == 0.0 ? knots_.front().y : knots_.front().y + left_slope_ * dx;
  }
  if (x >= knots_.back().x) {
    const double dx = x - knots_.back().x;
    return dx == 0.0 || right_slope_ == 0.0 ? knots_.back().y : knots_.back().y + right_slope_ * dx;
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot& k) { return v < k.x; });
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  if (x == lo.x) return lo.y;
  if (hi.y == lo.y) return lo.y;
  return lo.y + (hi.y - lo.y) * ((x - lo.x) / (hi.x - lo.x));
}

double PiecewiseMonotoneFn::slope_right_of(double x) const {
  if (x < knots_.front().x) return left_slope_;
  if (x >= knots_.back().x) return right_slope_;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot& k) { return v < k.x; });
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  return (hi.y - lo.y) / (hi.x - lo.x);
}

bool PiecewiseMonotoneFn::is_nondecreasing(double tol) const {
  if (left_slope_ < -tol || right_slope_ < -tol) return false;
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (knots_[i].y < knots_[i - 1].y - tol) return false;
  return true;
}

bool PiecewiseMonotoneFn::is_allocation_component(double tol) const {
  if (std::abs((*this)(0.0)) > tol) return false;
  auto slope_ok = [tol](double s) { return s >= -tol && s <= 1.0 + tol; };
  if (!slope_ok(left_slope_) || !slope_ok(right_slope_)) return false;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const double dy = knots_[i].y - knots_[i - 1].y;
    const double dx = knots_[i].x - knots_[i - 1].x;
    if (dy < -tol || dy > dx + tol) return false;
  }
  return true;
}

PiecewiseMonotoneFn PiecewiseMonotoneFn::simplified(double tol) const {
  if (knots_.size() == 1) return *this;
  std::vector<Knot> out;
  out.reserve(knots_.size());
  const std::size_t n = knots_.size();
  auto seg_slope = [&](std::size_t i) {  // slope of segment ending at knot i (i>=1)
    return (knots_[i].y - knots_[i - 1].y) / (knots_[i].x - knots_[i - 1].x);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double before = i == 0 ? left_slope_ : seg_slope(i);
    const double after = i + 1 == n ? right_slope_ : seg_slope(i + 1);
    if (std::abs(before - after) > tol || (out.empty() && i + 1 == n)) out.push_back(knots_[i]);
  }
  if (out.empty()) out.push_back(knots_.front());
  return {std::move(out), left_slope_, right_slope_};
}

PiecewiseMonotoneFn PiecewiseMonotoneFn::compose(const PiecewiseMonotoneFn& inner) const {
  if (!inner.is_nondecreasing()) throw PreconditionError("compose: inner function must be non-decreasing");
  std::vector<double> xs;
  for (const Knot& k : inner.knots()) xs.push_back(k.x);
  // Preimages under `inner` of this function's knots.
  const auto& ik = inner.knots();
  for (const Knot& ok : knots_) {
    const double u = ok.x;
    if (u < ik.front().y) {
      if (inner.left_slope() > 0.0) xs.push_back(ik.front().x + (u - ik.front().y) / inner.left_slope());
    } else if (u > ik.back().y) {
      if (inner.right_slope() > 0.0) xs.push_back(ik.back().x + (u - ik.back().y) / inner.right_slope());
    } else {
      for (std::size_t i = 1; i < ik.size(); ++i) {
        if (ik[i - 1].y < u && u < ik[i].y) {
          xs.push_back(ik[i - 1].x + (u - ik[i - 1].y) * (ik[i].x - ik[i - 1].x) / (ik[i].y - ik[i - 1].y));
          break;
        }
      }
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Knot> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back({x, (*this)(inner(x))});
  const double ls = inner.left_slope() > 0.0 ? inner.left_slope() * left_slope_ : 0.0;
  const double rs = inner.right_slope() > 0.0 ? inner.right_slope() * right_slope_ : 0.0;
  return PiecewiseMonotoneFn(std::move(out), ls, rs).simplified();
}

namespace {

PiecewiseMonotoneFn combine(const PiecewiseMonotoneFn& a, double wa, const PiecewiseMonotoneFn& b, double wb) {
  std::vector<double> xs;
  for (const Knot& k : a.knots()) xs.push_back(k.x);
  for (const Knot& k : b.knots()) xs.push_back(k.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Knot> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back({x, wa * a(x) + wb * b(x)});
  return {std::move(out), wa * a.left_slope() + wb * b.left_slope(), wa * a.right_slope() + wb * b.right_slope()};
}

}  // namespace

PiecewiseMonotoneFn operator+(const PiecewiseMonotoneFn& a, const PiecewiseMonotoneFn& b) { return combine(a, 1.0, b, 1.0); }
PiecewiseMonotoneFn operator-(const PiecewiseMonotoneFn& a, const PiecewiseMonotoneFn& b) { return combine(a, 1.0, b, -1.0); }

PiecewiseMonotoneFn operator*(double s, const PiecewiseMonotoneFn& f) {
  std::vector<Knot> out = f.knots();
  for (Knot& k : out) k.y *= s;
  return {std::move(out), s * f.left_slope(), s * f.right_slope()};
}

PiecewiseMonotoneFn sum(std::span<const PiecewiseMonotoneFn> fs) {
  if (fs.empty()) return PiecewiseMonotoneFn::constant(0.0);
  PiecewiseMonotoneFn acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = acc + fs[i];
  return acc;
}

}  // namespace riskalloc
