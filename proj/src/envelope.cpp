#include "riskalloc/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

// Crossings closer than this to a breakpoint are not split off.
constexpr double kLevelTol = 1e-12;

std::size_t piece_index(std::span<const AffinePiece> pieces, double t) {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const AffinePiece& p) { return v < p.start; });
  return it == pieces.begin() ? 0 : static_cast<std::size_t>(it - pieces.begin() - 1);
}

double value_at(const AffinePiece& p, double t) { return t == p.start ? p.value : p.value + p.slope * (t - p.start); }

}  // namespace

double evaluate_pieces(std::span<const AffinePiece> pieces, double t) {
  return value_at(pieces[piece_index(pieces, t)], t);
}

double left_limit_pieces(std::span<const AffinePiece> pieces, double t) {
  auto it = std::lower_bound(pieces.begin(), pieces.end(), t, [](const AffinePiece& p, double v) { return p.start < v; });
  const AffinePiece& p = it == pieces.begin() ? pieces.front() : *(it - 1);
  return value_at(p, t);
}

std::vector<EnvelopePiece> envelope(std::span<const std::vector<AffinePiece>> fns, EnvelopeSense sense, double tol) {
  if (fns.empty()) throw PreconditionError("envelope of an empty family");
  const std::size_t n = fns.size();

  std::vector<double> starts;
  double scale = 1.0;
  for (const auto& f : fns) {
    if (f.empty() || f.front().start != 0.0) throw PreconditionError("envelope inputs must start at 0");
    for (const AffinePiece& p : f) {
      starts.push_back(p.start);
      scale = std::max(scale, std::abs(p.value));
      scale = std::max(scale, std::abs(p.value + p.slope));
    }
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  const double abs_tol = tol * scale;
  const bool lower = sense == EnvelopeSense::lower;
  auto better = [lower](double a, double b) { return lower ? a < b : a > b; };

  std::vector<EnvelopePiece> out;
  std::vector<double> a(n), b(n);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const double u = starts[k];
    const double v = k + 1 < starts.size() ? starts[k + 1] : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const AffinePiece& p = fns[i][piece_index(fns[i], u)];
      a[i] = value_at(p, u);
      b[i] = p.slope;
    }
    std::vector<double> cuts{u};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (b[i] == b[j]) continue;
        const double c = u + (a[j] - a[i]) / (b[i] - b[j]);
        if (c > u + kLevelTol && c < v - kLevelTol) cuts.push_back(c);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t c = 0; c < cuts.size(); ++c) {
      const double lo = cuts[c];
      const double hi = c + 1 < cuts.size() ? cuts[c + 1] : v;
      const double mid = 0.5 * (lo + hi);
      auto at = [&](std::size_t i, double t) { return t == u ? a[i] : a[i] + b[i] * (t - u); };
      double best = at(0, mid);
      for (std::size_t i = 1; i < n; ++i)
        if (better(at(i, mid), best)) best = at(i, mid);
      std::size_t winner = n;
      for (std::size_t i = 0; i < n && winner == n; ++i)
        if (std::abs(at(i, mid) - best) <= abs_tol) winner = i;
      std::vector<std::size_t> tied;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(at(i, lo) - at(winner, lo)) <= abs_tol && std::abs(at(i, hi) - at(winner, hi)) <= abs_tol)
          tied.push_back(i);
      if (tied.size() < 2) tied.clear();
      EnvelopePiece piece{lo, at(winner, lo), b[winner], winner, std::move(tied)};

      if (!out.empty()) {
        const EnvelopePiece& prev = out.back();
        const double continued = prev.value + prev.slope * (lo - prev.start);
        if (prev.winner == piece.winner && prev.tied == piece.tied && prev.slope == piece.slope &&
            std::abs(continued - piece.value) <= 1e-15 * scale)
          continue;
      }
      out.push_back(std::move(piece));
    }
  }
  return out;
}

}  // namespace riskalloc
