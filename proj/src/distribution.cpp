#include "riskalloc/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <charconv>

#include "riskalloc/errors.hpp"
#include "riskalloc/rng.hpp"

namespace riskalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbTol = 1e-12;

// Neumaier summation: rounding of many small weights must not trip the
// sum-to-one check.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_level(double t) {
  if (std::isnan(t) || t < 0.0 || t > 1.0) throw DomainError("quantile level must lie in [0, 1]");
  if (t == 0.0) throw DomainError("quantile at level 0 is the infimum over all reals and is not defined");
}

// ---- continuous families ---------------------------------------------------

double lower(const detail::UniformLaw& u) { return u.lower; }
double upper(const detail::UniformLaw& u) { return u.upper; }
double lower(const detail::ExponentialLaw&) { return 0.0; }
double upper(const detail::ExponentialLaw&) { return kInf; }

double cdf_of(const detail::UniformLaw& u, double x) {
  if (x <= u.lower) return 0.0;
  if (x >= u.upper) return 1.0;
  return (x - u.lower) / (u.upper - u.lower);
}
double cdf_of(const detail::ExponentialLaw& e, double x) {
  if (x <= 0.0) return 0.0;
  if (x == kInf) return 1.0;
  return -std::expm1(-e.rate * x);
}

double quantile_of(const detail::UniformLaw& u, double t) { return u.lower + t * (u.upper - u.lower); }
double quantile_of(const detail::ExponentialLaw& e, double t) {
  if (t >= 1.0) return kInf;
  return -std::log1p(-t) / e.rate;
}

double qint_of(const detail::UniformLaw& u, double a, double b) {
  return (b - a) * (u.lower + (u.upper - u.lower) * 0.5 * (a + b));
}
// G(v) = v ln v - v is an antiderivative of ln v, with G(0) = 0.
double xlogx_minus_x(double v) { return v <= 0.0 ? 0.0 : v * std::log(v) - v; }
double qint_of(const detail::ExponentialLaw& e, double a, double b) {
  return (xlogx_minus_x(1.0 - b) - xlogx_minus_x(1.0 - a)) / e.rate;
}

double cint_of(const detail::UniformLaw& u, double x1, double x2) {
  const double w = u.upper - u.lower;
  const double c1 = std::clamp(x1, u.lower, u.upper) - u.lower;
  const double c2 = std::clamp(x2, u.lower, u.upper) - u.lower;
  const double above = std::max(0.0, x2 - std::max(x1, u.upper));
  return (c2 * c2 - c1 * c1) / (2.0 * w) + above;
}
double cint_of(const detail::ExponentialLaw& e, double x1, double x2) {
  const double l1 = std::max(x1, 0.0);
  const double l2 = std::max(x2, 0.0);
  return (l2 - l1) - (std::exp(-e.rate * l1) - std::exp(-e.rate * l2)) / e.rate;
}

double tail_of(const detail::UniformLaw& u, double x) {
  const double w = u.upper - u.lower;
  if (x >= u.upper) return 0.0;
  if (x <= u.lower) return (u.lower - x) + 0.5 * w;
  return (u.upper - x) * (u.upper - x) / (2.0 * w);
}
double tail_of(const detail::ExponentialLaw& e, double x) {
  return (x < 0.0 ? -x : 0.0) + std::exp(-e.rate * std::max(x, 0.0)) / e.rate;
}

std::string describe_of(const detail::UniformLaw& u) {
  std::ostringstream os;
  os << "uniform(" << u.lower << ", " << u.upper << ")";
  return os.str();
}
std::string describe_of(const detail::ExponentialLaw& e) {
  std::ostringstream os;
  os << "exponential(rate=" << e.rate << ")";
  return os.str();
}

template <class F>
auto visit_base(const std::variant<detail::UniformLaw, detail::ExponentialLaw>& base, F&& f) {
  return std::visit(std::forward<F>(f), base);
}

}  // namespace

// ---- construction -----------------------------------------------------------

LossDistribution LossDistribution::merged_discrete(std::vector<std::pair<double, double>> weighted,
                                                   std::vector<double> sample) {
  if (weighted.empty()) throw PreconditionError("discrete distribution needs at least one atom");
  CompensatedSum total;
  for (const auto& [x, p] : weighted) {
    if (!std::isfinite(x)) throw PreconditionError("atom values must be finite");
    if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("atom probabilities must be positive");
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > kProbTol) throw PreconditionError("atom probabilities must sum to 1");
  std::stable_sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Discrete d;
  for (const auto& [x, p] : weighted) {
    if (!d.atoms.empty() && d.atoms.back() == x) {
      d.probs.back() += p;
    } else {
      d.atoms.push_back(x);
      d.probs.push_back(p);
    }
  }
  d.cum.resize(d.probs.size());
  std::partial_sum(d.probs.begin(), d.probs.end(), d.cum.begin());
  d.cum.back() = 1.0;
  d.sample = std::move(sample);
  return LossDistribution(Rep{std::move(d)});
}

LossDistribution LossDistribution::discrete(std::vector<double> atoms, std::vector<double> probs) {
  if (atoms.size() != probs.size()) throw PreconditionError("atoms and probabilities differ in length");
  std::vector<std::pair<double, double>> w;
  w.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) w.emplace_back(atoms[i], probs[i]);
  return merged_discrete(std::move(w), {});
}

LossDistribution LossDistribution::empirical(std::vector<double> sample) {
  if (sample.empty()) throw PreconditionError("empirical sample is empty");
  std::sort(sample.begin(), sample.end());
  std::vector<std::pair<double, double>> w;
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size();) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    w.emplace_back(sample[i], static_cast<double>(j - i) / n);
    i = j;
  }
  CompensatedSum total;
  for (const auto& e : w) total.add(e.second);
  if (std::abs(total.value() - 1.0) > kProbTol) throw PreconditionError("empirical weights do not sum to 1");
  return merged_discrete(std::move(w), std::move(sample));
}

LossDistribution LossDistribution::point_mass(double value) { return discrete({value}, {1.0}); }

LossDistribution LossDistribution::uniform(double lower, double upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower))
    throw PreconditionError("uniform distribution requires finite lower < upper");
  return LossDistribution(Rep{Uniform{lower, upper}});
}

LossDistribution LossDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw PreconditionError("exponential rate must be positive");
  return LossDistribution(Rep{Exponential{rate}});
}

LossDistribution LossDistribution::from_transformed(const Continuous& base, const PiecewiseMonotoneFn& f) {
  if (!f.is_nondecreasing()) throw PreconditionError("pushforward requires a non-decreasing map");
  const double lo = visit_base(base, [](const auto& b) { return lower(b); });
  const double hi = visit_base(base, [](const auto& b) { return upper(b); });

  std::vector<double> xs{lo};
  for (const Knot& k : f.knots())
    if (k.x > lo && k.x < hi) xs.push_back(k.x);
  xs.push_back(hi);

  std::vector<Segment> segs;
  bool identity = true;
  bool flat = true;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    Segment s{};
    s.x0 = xs[i];
    s.x1 = xs[i + 1];
    s.slope = f.slope_right_of(s.x0);
    s.y0 = f(s.x0);
    s.y1 = std::isfinite(s.x1) ? f(s.x1) : (s.slope > 0.0 ? kInf : s.y0);
    identity = identity && s.slope == 1.0 && s.y0 == s.x0;
    flat = flat && s.slope == 0.0;
    segs.push_back(s);
  }
  if (identity) return std::visit([](const auto& b) { return LossDistribution(Rep{b}); }, base);
  if (flat) return point_mass(segs.front().y0);
  return LossDistribution(Rep{Transformed{base, f, std::move(segs)}});
}

// ---- queries ----------------------------------------------------------------

DistributionKind LossDistribution::kind() const noexcept {
  return std::visit(Overloaded{
                        [](const Discrete& d) { return d.sample.empty() ? DistributionKind::discrete : DistributionKind::empirical; },
                        [](const Uniform&) { return DistributionKind::uniform; },
                        [](const Exponential&) { return DistributionKind::exponential; },
                        [](const Transformed&) { return DistributionKind::transformed; },
                    },
                    rep_);
}

bool LossDistribution::is_discrete() const noexcept { return std::holds_alternative<Discrete>(rep_); }

double LossDistribution::cdf(double x) const {
  return std::visit(Overloaded{
                        [x](const Discrete& d) {
                          auto idx = std::upper_bound(d.atoms.begin(), d.atoms.end(), x) - d.atoms.begin();
                          return idx == 0 ? 0.0 : d.cum[static_cast<std::size_t>(idx - 1)];
                        },
                        [x](const Uniform& u) { return cdf_of(u, x); },
                        [x](const Exponential& e) { return cdf_of(e, x); },
                        [x](const Transformed& t) {
                          if (x < t.segments.front().y0) return 0.0;
                          for (auto it = t.segments.rbegin(); it != t.segments.rend(); ++it) {
                            if (it->y0 > x) continue;
                            if (it->slope > 0.0 && x < it->y1)
                              return visit_base(t.base, [&](const auto& b) { return cdf_of(b, it->x0 + (x - it->y0) / it->slope); });
                            return visit_base(t.base, [&](const auto& b) { return cdf_of(b, it->x1); });
                          }
                          return 0.0;
                        },
                    },
                    rep_);
}

double LossDistribution::cdf_left(double x) const {
  return std::visit(Overloaded{
                        [x](const Discrete& d) {
                          auto idx = std::lower_bound(d.atoms.begin(), d.atoms.end(), x) - d.atoms.begin();
                          return idx == 0 ? 0.0 : d.cum[static_cast<std::size_t>(idx - 1)];
                        },
                        [x](const Uniform& u) { return cdf_of(u, x); },
                        [x](const Exponential& e) { return cdf_of(e, x); },
                        [x](const Transformed& t) {
                          if (x <= t.segments.front().y0) return 0.0;
                          for (const Segment& s : t.segments) {
                            if (s.y1 < x) continue;
                            const double at = s.slope > 0.0 && x > s.y0 ? s.x0 + (x - s.y0) / s.slope : s.x0;
                            return visit_base(t.base, [&](const auto& b) { return cdf_of(b, at); });
                          }
                          return 1.0;
                        },
                    },
                    rep_);
}

double LossDistribution::quantile(double t) const {
  check_level(t);
  return std::visit(Overloaded{
                        [t](const Discrete& d) {
                          auto idx = std::lower_bound(d.cum.begin(), d.cum.end(), t) - d.cum.begin();
                          return d.atoms[std::min(static_cast<std::size_t>(idx), d.atoms.size() - 1)];
                        },
                        [t](const Uniform& u) { return quantile_of(u, t); },
                        [t](const Exponential& e) { return quantile_of(e, t); },
                        [t](const Transformed& tr) {
                          return tr.f(visit_base(tr.base, [t](const auto& b) { return quantile_of(b, t); }));
                        },
                    },
                    rep_);
}

double LossDistribution::ess_inf() const {
  return std::visit(Overloaded{
                        [](const Discrete& d) { return d.atoms.front(); },
                        [](const Uniform& u) { return u.lower; },
                        [](const Exponential&) { return 0.0; },
                        [](const Transformed& t) { return t.segments.front().y0; },
                    },
                    rep_);
}

double LossDistribution::ess_sup() const {
  return std::visit(Overloaded{
                        [](const Discrete& d) { return d.atoms.back(); },
                        [](const Uniform& u) { return u.upper; },
                        [](const Exponential&) { return kInf; },
                        [](const Transformed& t) { return t.segments.back().y1; },
                    },
                    rep_);
}

double LossDistribution::quantile_integral(double a, double b) const {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (!(b > a)) return 0.0;
  return std::visit(Overloaded{
                        [a, b](const Discrete& d) {
                          double acc = 0.0;
                          double prev = 0.0;
                          for (std::size_t j = 0; j < d.atoms.size(); ++j) {
                            const double lo = std::max(a, prev);
                            const double hi = std::min(b, d.cum[j]);
                            if (hi > lo) acc += d.atoms[j] * (hi - lo);
                            prev = d.cum[j];
                            if (prev >= b) break;
                          }
                          return acc;
                        },
                        [a, b](const Uniform& u) { return qint_of(u, a, b); },
                        [a, b](const Exponential& e) { return qint_of(e, a, b); },
                        [a, b](const Transformed& t) {
                          double acc = 0.0;
                          for (const Segment& s : t.segments) {
                            const double t0 = visit_base(t.base, [&](const auto& bl) { return cdf_of(bl, s.x0); });
                            const double t1 = visit_base(t.base, [&](const auto& bl) { return cdf_of(bl, s.x1); });
                            const double lo = std::max(a, t0);
                            const double hi = std::min(b, t1);
                            if (!(hi > lo)) continue;
                            acc += s.y0 * (hi - lo);
                            if (s.slope != 0.0) {
                              const double q = visit_base(t.base, [&](const auto& bl) { return qint_of(bl, lo, hi); });
                              acc += s.slope * (q - s.x0 * (hi - lo));
                            }
                          }
                          return acc;
                        },
                    },
                    rep_);
}

double LossDistribution::cdf_integral(double x1, double x2) const {
  if (!(x2 > x1)) return 0.0;
  return std::visit(Overloaded{
                        [x1, x2](const Discrete& d) {
                          double acc = 0.0;
                          for (std::size_t j = 0; j < d.atoms.size(); ++j) {
                            const double lo = std::max(x1, d.atoms[j]);
                            const double hi = j + 1 < d.atoms.size() ? std::min(x2, d.atoms[j + 1]) : x2;
                            if (hi > lo) acc += d.cum[j] * (hi - lo);
                          }
                          return acc;
                        },
                        [x1, x2](const Uniform& u) { return cint_of(u, x1, x2); },
                        [x1, x2](const Exponential& e) { return cint_of(e, x1, x2); },
                        [x1, x2](const Transformed& t) {
                          double acc = 0.0;
                          for (const Segment& s : t.segments) {
                            if (!(s.slope > 0.0)) continue;
                            const double lo = std::max(x1, s.y0);
                            const double hi = std::min(x2, s.y1);
                            if (!(hi > lo)) continue;
                            const double xa = s.x0 + (lo - s.y0) / s.slope;
                            const double xb = s.x0 + (hi - s.y0) / s.slope;
                            acc += s.slope * visit_base(t.base, [&](const auto& bl) { return cint_of(bl, xa, xb); });
                          }
                          const double top = t.segments.back().y1;
                          if (std::isfinite(top)) acc += std::max(0.0, x2 - std::max(x1, top));
                          return acc;
                        },
                    },
                    rep_);
}

double LossDistribution::upper_survival_integral(double x) const {
  return std::visit(Overloaded{
                        [this, x](const Discrete& d) {
                          const double top = d.atoms.back();
                          if (x >= top) return 0.0;
                          return (top - x) - cdf_integral(x, top);
                        },
                        [x](const Uniform& u) { return tail_of(u, x); },
                        [x](const Exponential& e) { return tail_of(e, x); },
                        [this, x](const Transformed& t) {
                          const Segment& last = t.segments.back();
                          if (std::isfinite(last.y1)) {
                            if (x >= last.y1) return 0.0;
                            return (last.y1 - x) - cdf_integral(x, last.y1);
                          }
                          double acc = 0.0;
                          if (x < last.y0) acc += (last.y0 - x) - cdf_integral(x, last.y0);
                          const double from = std::max(x, last.y0);
                          const double xa = last.x0 + (from - last.y0) / last.slope;
                          acc += last.slope * visit_base(t.base, [&](const auto& bl) { return tail_of(bl, xa); });
                          return acc;
                        },
                    },
                    rep_);
}

double LossDistribution::expectation() const {
  return std::visit(Overloaded{
                        [](const Discrete& d) {
                          double acc = 0.0;
                          for (std::size_t j = 0; j < d.atoms.size(); ++j) acc += d.atoms[j] * d.probs[j];
                          return acc;
                        },
                        [](const Uniform& u) { return 0.5 * (u.lower + u.upper); },
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [this](const Transformed&) { return quantile_integral(0.0, 1.0); },
                    },
                    rep_);
}

std::span<const double> LossDistribution::atoms() const {
  if (const auto* d = std::get_if<Discrete>(&rep_)) return d->atoms;
  throw PreconditionError("atoms() requires a discrete distribution");
}

std::span<const double> LossDistribution::probs() const {
  if (const auto* d = std::get_if<Discrete>(&rep_)) return d->probs;
  throw PreconditionError("probs() requires a discrete distribution");
}

std::span<const double> LossDistribution::sample_values() const {
  if (const auto* d = std::get_if<Discrete>(&rep_); d && !d->sample.empty()) return d->sample;
  throw PreconditionError("sample_values() requires an empirical distribution");
}

std::string LossDistribution::describe() const {
  return std::visit(Overloaded{
                        [](const Discrete& d) {
                          return (d.sample.empty() ? std::string("discrete(") + std::to_string(d.atoms.size()) + " atoms)"
                                                   : std::string("empirical(n=") + std::to_string(d.sample.size()) + ")");
                        },
                        [](const Uniform& u) { return describe_of(u); },
                        [](const Exponential& e) { return describe_of(e); },
                        [](const Transformed& t) {
                          return "transformed " + visit_base(t.base, [](const auto& b) { return describe_of(b); });
                        },
                    },
                    rep_);
}

LossDistribution LossDistribution::pushforward(const PiecewiseMonotoneFn& f) const {
  if (!f.is_nondecreasing()) throw PreconditionError("pushforward requires a non-decreasing map");
  return std::visit(Overloaded{
                        [&f](const Discrete& d) {
                          std::vector<std::pair<double, double>> w;
                          w.reserve(d.atoms.size());
                          for (std::size_t j = 0; j < d.atoms.size(); ++j) w.emplace_back(f(d.atoms[j]), d.probs[j]);
                          std::vector<double> sample;
                          sample.reserve(d.sample.size());
                          for (double s : d.sample) sample.push_back(f(s));
                          return merged_discrete(std::move(w), std::move(sample));
                        },
                        [&f](const Uniform& u) { return from_transformed(Continuous{u}, f); },
                        [&f](const Exponential& e) { return from_transformed(Continuous{e}, f); },
                        [&f](const Transformed& t) { return from_transformed(t.base, f.compose(t.f)); },
                    },
                    rep_);
}

// ---- free functions ---------------------------------------------------------

double cdf(const LossDistribution& dist, double x) { return dist.cdf(x); }
double quantile(const LossDistribution& dist, double t) { return dist.quantile(t); }
double expectation(const LossDistribution& dist) { return dist.expectation(); }

LossDistribution truncate(const LossDistribution& dist, double m) {
  if (!(m > dist.ess_inf())) throw PreconditionError("truncation level must exceed the infimum of the support");
  if (m >= dist.ess_sup()) return dist;
  return dist.pushforward(PiecewiseMonotoneFn::cap(m));
}

LossDistribution pushforward(const LossDistribution& dist, const PiecewiseMonotoneFn& f) { return dist.pushforward(f); }

LossDistribution from_values(std::span<const double> values, std::span<const double> probs) {
  return LossDistribution::discrete({values.begin(), values.end()}, {probs.begin(), probs.end()});
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

LossDistribution ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++row;
    std::string_view v = trim(line);
    if (row == 1 && v.size() >= 3 && v.substr(0, 3) == "\xEF\xBB\xBF") v.remove_prefix(3);
    if (v.empty()) continue;
    if (!header_seen) {
      if (v != "loss") throw ParseError("expected header `loss`", row);
      header_seen = true;
      continue;
    }
    double x = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || !std::isfinite(x)) throw ParseError("malformed loss value `" + std::string(v) + "`", row);
    values.push_back(x);
  }
  if (!header_seen) throw ParseError("empty file", row);
  if (values.empty()) throw ParseError("no data rows", row);
  return LossDistribution::empirical(std::move(values));
}

std::vector<double> draw(const LossDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("sample size must be at least 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = dist.quantile(rng.uniform_open());
  return out;
}

LossDistribution sample(const LossDistribution& dist, std::size_t n, std::uint64_t seed) {
  return LossDistribution::empirical(draw(dist, n, seed));
}

}  // namespace riskalloc
