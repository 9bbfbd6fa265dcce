#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskalloc {

// One affine piece of a function on [0, 1): value + slope * (t - start)
// for t in [start, next start).
struct AffinePiece {
  double start;
  double value;
  double slope;
  bool operator==(const AffinePiece&) const = default;
};

double evaluate_pieces(std::span<const AffinePiece> pieces, double t);
// Left limit at t in (0, 1].
double left_limit_pieces(std::span<const AffinePiece> pieces, double t);

struct EnvelopePiece {
  double start;
  double value;
  double slope;
  std::size_t winner;               // lowest index attaining the extremum
  std::vector<std::size_t> tied;    // all indices attaining it on the whole piece, if >= 2
};

enum class EnvelopeSense { lower, upper };

// Pointwise lower/upper envelope of piecewise-affine functions on [0, 1).
// Pieces are split at every input breakpoint and every pairwise crossing,
// then adjacent pieces with the same winner, ties and line are merged.
// `tol` is relative to the largest function value magnitude.
std::vector<EnvelopePiece> envelope(std::span<const std::vector<AffinePiece>> fns, EnvelopeSense sense,
                                    double tol = 1e-12);

}  // namespace riskalloc
