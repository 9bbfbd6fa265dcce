#include "riskalloc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

constexpr double kJumpTol = 1e-12;

double end_value(const AffinePiece& p, double end) { return p.value + p.slope * (end - p.start); }

}  // namespace

DistortionKernel::DistortionKernel(std::vector<AffinePiece> pieces, KernelFamily family, double parameter)
    : pieces_(std::move(pieces)), family_(family), parameter_(parameter) {
  if (pieces_.empty()) throw ValidationError("kernel needs at least one piece");
  if (pieces_.front().start != 0.0) throw ValidationError("kernel pieces must start at 0");
  if (std::abs(pieces_.front().value) > kJumpTol) throw ValidationError("kernel must satisfy Phi(0) = 0");
  pieces_.front().value = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const AffinePiece& p = pieces_[k];
    if (!std::isfinite(p.start) || !std::isfinite(p.value) || !std::isfinite(p.slope))
      throw ValidationError("kernel pieces must be finite");
    if (p.slope < 0.0) throw ValidationError("kernel slopes must be non-negative");
    if (k > 0) {
      if (!(p.start > pieces_[k - 1].start)) throw ValidationError("kernel breakpoints must be strictly ascending");
      if (p.value < end_value(pieces_[k - 1], p.start) - kJumpTol) throw ValidationError("kernel must be non-decreasing");
    }
    if (p.start >= 1.0) throw ValidationError("kernel breakpoints must lie in [0, 1)");
  }
  const double end = end_value(pieces_.back(), 1.0);
  if (end > 1.0 + kJumpTol) throw ValidationError("kernel exceeds 1 before level 1");
  atom_at_one_ = 1.0 - end > kJumpTol ? 1.0 - end : 0.0;
}

DistortionKernel DistortionKernel::expectation() {
  return DistortionKernel({{0.0, 0.0, 1.0}}, KernelFamily::expectation, 0.0);
}

DistortionKernel DistortionKernel::var_at(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("VaR level must lie in (0, 1]");
  if (alpha == 1.0) return DistortionKernel({{0.0, 0.0, 0.0}}, KernelFamily::var, alpha);
  return DistortionKernel({{0.0, 0.0, 0.0}, {alpha, 1.0, 0.0}}, KernelFamily::var, alpha);
}

DistortionKernel DistortionKernel::cvar_at(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw PreconditionError("CVaR level must lie in [0, 1)");
  if (alpha == 0.0) return DistortionKernel({{0.0, 0.0, 1.0}}, KernelFamily::cvar, 0.0);
  return DistortionKernel({{0.0, 0.0, 0.0}, {alpha, 0.0, 1.0 / (1.0 - alpha)}}, KernelFamily::cvar, alpha);
}

DistortionKernel DistortionKernel::prop_hazard(double r, int pieces) {
  if (!(r > 0.0 && r <= 1.0)) throw PreconditionError("proportional hazard exponent must lie in (0, 1]");
  if (pieces < 1) throw PreconditionError("proportional hazard grid needs at least one piece");
  const double n = static_cast<double>(pieces);
  auto phi = [r](double t) { return t >= 1.0 ? 1.0 : -std::expm1(r * std::log1p(-t)); };
  std::vector<AffinePiece> out;
  out.reserve(static_cast<std::size_t>(pieces));
  for (int k = 0; k < pieces; ++k) {
    const double t0 = k / n;
    const double t1 = (k + 1) / n;
    out.push_back({t0, phi(t0), (phi(t1) - phi(t0)) * n});
  }
  return DistortionKernel(std::move(out), KernelFamily::prop_hazard, r);
}

DistortionKernel DistortionKernel::from_points(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw ValidationError("kernel points need at least (0,0) and (1,1)");
  if (points.front().first != 0.0 || points.front().second != 0.0)
    throw ValidationError("kernel points must start at (0, 0)");
  if (points.back().first != 1.0 || points.back().second != 1.0)
    throw ValidationError("kernel points must end at (1, 1)");
  // Group by abscissa: (t, left value, right value).
  struct Level {
    double t, left, right;
  };
  std::vector<Level> levels;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [t, y] = points[i];
    if (!std::isfinite(t) || !std::isfinite(y)) throw ValidationError("kernel points must be finite");
    if (!levels.empty() && t == levels.back().t) {
      if (levels.back().left != levels.back().right) throw ValidationError("at most two points may share an abscissa");
      levels.back().right = y;
    } else {
      if (!levels.empty() && t < levels.back().t) throw ValidationError("kernel points must be ascending in t");
      levels.push_back({t, y, y});
    }
  }
  if (levels.front().left != levels.front().right) throw ValidationError("kernel cannot jump at level 0");
  std::vector<AffinePiece> out;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const Level& a = levels[k];
    const Level& b = levels[k + 1];
    out.push_back({a.t, a.right, (b.left - a.right) / (b.t - a.t)});
  }
  return DistortionKernel(std::move(out), KernelFamily::points, 0.0);
}

double DistortionKernel::operator()(double t) const {
  if (t >= 1.0) return 1.0;
  if (t <= 0.0) return 0.0;
  return evaluate_pieces(pieces_, t);
}

double DistortionKernel::left_limit(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0 - atom_at_one_;
  return left_limit_pieces(pieces_, t);
}

std::vector<DistortionKernel::Jump> DistortionKernel::jumps() const {
  std::vector<Jump> out;
  for (std::size_t k = 1; k < pieces_.size(); ++k) {
    const double mass = pieces_[k].value - end_value(pieces_[k - 1], pieces_[k].start);
    if (mass > kJumpTol) out.push_back({pieces_[k].start, mass});
  }
  if (atom_at_one_ > 0.0) out.push_back({1.0, atom_at_one_});
  return out;
}

bool DistortionKernel::is_convex(double tol) const {
  for (std::size_t k = 1; k < pieces_.size(); ++k) {
    if (pieces_[k].slope < pieces_[k - 1].slope - tol) return false;
    if (pieces_[k].value - end_value(pieces_[k - 1], pieces_[k].start) > tol) return false;
  }
  return true;
}

std::string DistortionKernel::label() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::expectation: return "expectation";
    case KernelFamily::var: os << "var(" << parameter_ << ")"; break;
    case KernelFamily::cvar: os << "cvar(" << parameter_ << ")"; break;
    case KernelFamily::prop_hazard: os << "prop_hazard(" << parameter_ << ")"; break;
    case KernelFamily::points: os << "points(" << pieces_.size() << " pieces)"; break;
    case KernelFamily::envelope: os << "max(" << pieces_.size() << " pieces)"; break;
  }
  return os.str();
}

DistortionKernel DistortionKernel::normalized(double tol) const {
  std::vector<AffinePiece> out{pieces_.front()};
  for (std::size_t k = 1; k < pieces_.size(); ++k) {
    const AffinePiece& prev = out.back();
    const AffinePiece& p = pieces_[k];
    if (std::abs(p.slope - prev.slope) <= tol && std::abs(end_value(prev, p.start) - p.value) <= tol) continue;
    out.push_back(p);
  }
  return DistortionKernel(std::move(out), family_, parameter_);
}

bool DistortionKernel::same_function(const DistortionKernel& other, double tol) const {
  std::vector<double> ts;
  for (const auto& p : pieces_) ts.push_back(p.start);
  for (const auto& p : other.pieces_) ts.push_back(p.start);
  ts.push_back(1.0);
  for (double t : ts) {
    if (std::abs((*this)(t) - other(t)) > tol) return false;
    if (t > 0.0 && std::abs(left_limit(t) - other.left_limit(t)) > tol) return false;
  }
  return true;
}

double DualDistortion::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - (*kernel_)(1.0 - x);
}

DistortionKernel max_kernel(std::span<const DistortionKernel> kernels) {
  if (kernels.empty()) throw PreconditionError("max_kernel of an empty family");
  if (kernels.size() == 1) return kernels.front();
  std::vector<std::vector<AffinePiece>> fns;
  fns.reserve(kernels.size());
  for (const auto& k : kernels) fns.push_back(k.pieces());
  std::vector<AffinePiece> pieces;
  for (const EnvelopePiece& e : envelope(fns, EnvelopeSense::upper)) pieces.push_back({e.start, e.value, e.slope});
  return DistortionKernel(std::move(pieces), KernelFamily::envelope, 0.0).normalized();
}

}  // namespace riskalloc
