#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskalloc/envelope.hpp"

namespace riskalloc {

enum class KernelFamily { expectation, var, cvar, prop_hazard, points, envelope };

// Distortion kernel: a non-decreasing, right-continuous Φ on [0, 1] with
// Φ(0) = 0 and Φ(1) = 1, stored as affine pieces on [0, 1). A jump at an
// interior breakpoint is the difference between the piece value and the
// left limit there; the gap 1 - Φ(1-) is a jump at level 1.
class DistortionKernel {
 public:
  explicit DistortionKernel(std::vector<AffinePiece> pieces, KernelFamily family = KernelFamily::points,
                            double parameter = 0.0);

  static DistortionKernel expectation();
  static DistortionKernel var_at(double alpha);    // alpha in (0, 1]
  static DistortionKernel cvar_at(double alpha);   // alpha in [0, 1)
  static DistortionKernel prop_hazard(double r, int pieces = kPropHazardPieces);  // r in (0, 1]
  // Ascending (t, Φ(t)) pairs from (0, 0) to (1, 1), linearly interpolated.
  // A repeated t marks a jump: the first value is Φ(t-), the second Φ(t).
  static DistortionKernel from_points(std::span<const std::pair<double, double>> points);

  static constexpr int kPropHazardPieces = 1024;

  double operator()(double t) const;
  double left_limit(double t) const;  // Φ(t-) for t in (0, 1]
  double atom_at_one() const noexcept { return atom_at_one_; }

  struct Jump {
    double location;
    double mass;
  };
  // Jumps of Φ in (0, 1], ascending; masses below 1e-12 are dropped.
  std::vector<Jump> jumps() const;

  const std::vector<AffinePiece>& pieces() const noexcept { return pieces_; }
  double piece_end(std::size_t k) const { return k + 1 < pieces_.size() ? pieces_[k + 1].start : 1.0; }

  bool is_convex(double tol = 1e-12) const;

  KernelFamily family() const noexcept { return family_; }
  double parameter() const noexcept { return parameter_; }
  std::string label() const;

  // Same function with collinear continuous pieces merged.
  DistortionKernel normalized(double tol = 1e-15) const;

  // Pointwise equality at every breakpoint of either kernel (values and left limits).
  bool same_function(const DistortionKernel& other, double tol = 1e-12) const;

 private:
  std::vector<AffinePiece> pieces_;
  double atom_at_one_ = 0.0;
  KernelFamily family_;
  double parameter_;
};

// g(x) = 1 - Φ(1 - x), the distortion applied to survival probabilities.
class DualDistortion {
 public:
  explicit DualDistortion(const DistortionKernel& kernel) : kernel_(&kernel) {}
  double operator()(double x) const;

 private:
  const DistortionKernel* kernel_;
};

inline bool is_convex(const DistortionKernel& k) { return k.is_convex(); }

// Pointwise maximum; again a valid kernel.
DistortionKernel max_kernel(std::span<const DistortionKernel> kernels);

}  // namespace riskalloc
