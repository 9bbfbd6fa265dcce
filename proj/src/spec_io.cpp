#include "riskalloc/spec_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

std::string field(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw SpecError(field(path, key), "unknown field");
  }
}

const Json& require(const Json& j, const std::string& path, std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw SpecError(field(path, key), "missing field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SpecError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(path, "expected a finite number");
  return v;
}

std::uint64_t count(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned()) throw SpecError(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SpecError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

double parse_number(std::string_view s, const std::string& path) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) {
    throw SpecError(path, "malformed number `" + std::string(s) + "`");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

// Library constructors report contract violations with their own exception
// types; a spec surfaces all of them as SpecError at the given path.
template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const SpecError&) {
    throw;
  } catch (const ParseError& e) {
    throw SpecError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw SpecError(path, e.what());
  } catch (const std::domain_error& e) {
    throw SpecError(path, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, std::string_view p) {
  const std::filesystem::path file{std::string(p)};
  return file.is_absolute() || base_dir.empty() ? file : base_dir / file;
}

}  // namespace

DistortionKernel parse_kernel(const Json& j, const std::string& path) {
  if (j.is_string()) return parse_kernel_shorthand(j.get<std::string>(), path);
  if (!j.is_object()) throw SpecError(path, "expected a kernel object or shorthand string");
  const Json& type = require(j, path, "type");
  if (!type.is_string()) throw SpecError(field(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "expectation") {
    only_keys(j, path, {"type"});
    return DistortionKernel::expectation();
  }
  if (t == "var" || t == "cvar") {
    only_keys(j, path, {"type", "alpha"});
    const std::string p = field(path, "alpha");
    const double a = number(require(j, path, "alpha"), p);
    return guarded(p, [&] { return t == "var" ? DistortionKernel::var_at(a) : DistortionKernel::cvar_at(a); });
  }
  if (t == "prop_hazard") {
    only_keys(j, path, {"type", "r"});
    const std::string p = field(path, "r");
    const double r = number(require(j, path, "r"), p);
    return guarded(p, [&] { return DistortionKernel::prop_hazard(r); });
  }
  if (t == "points") {
    only_keys(j, path, {"type", "points"});
    const std::string p = field(path, "points");
    const Json& pts = require(j, path, "points");
    if (!pts.is_array()) throw SpecError(p, "expected an array of [t, value] pairs");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string pi = index(p, i);
      const Json& e = pts[i];
      if (e.is_array()) {
        if (e.size() != 2) throw SpecError(pi, "expected a [t, value] pair");
        out.emplace_back(number(e[0], index(pi, 0)), number(e[1], index(pi, 1)));
      } else if (e.is_object()) {
        only_keys(e, pi, {"t", "jump"});
        const double at = number(require(e, pi, "t"), field(pi, "t"));
        const auto lr = numbers(require(e, pi, "jump"), field(pi, "jump"));
        if (lr.size() != 2) throw SpecError(field(pi, "jump"), "expected [left, right]");
        out.emplace_back(at, lr[0]);
        out.emplace_back(at, lr[1]);
      } else {
        throw SpecError(pi, "expected a [t, value] pair or a jump marker");
      }
    }
    return guarded(p, [&] { return DistortionKernel::from_points(out); });
  }
  throw SpecError(field(path, "type"), "unknown kernel type `" + t + "`");
}

DistortionKernel parse_kernel_shorthand(std::string_view s, const std::string& path) {
  if (s == "expectation" || s == "mean") return DistortionKernel::expectation();
  const std::size_t colon = s.find(':');
  const std::string_view head = s.substr(0, colon);
  if (colon == std::string_view::npos) throw SpecError(path, "unknown kernel shorthand `" + std::string(s) + "`");
  const double v = parse_number(s.substr(colon + 1), path);
  if (head == "var") return guarded(path, [&] { return DistortionKernel::var_at(v); });
  if (head == "cvar") return guarded(path, [&] { return DistortionKernel::cvar_at(v); });
  if (head == "ph") return guarded(path, [&] { return DistortionKernel::prop_hazard(v); });
  throw SpecError(path, "unknown kernel shorthand `" + std::string(s) + "`");
}

LossDistribution parse_distribution(const Json& j, const std::string& path, const std::filesystem::path& base_dir) {
  if (j.is_string()) return parse_distribution_shorthand(j.get<std::string>(), path, base_dir);
  if (!j.is_object()) throw SpecError(path, "expected a distribution object or shorthand string");
  const Json& type = require(j, path, "type");
  if (!type.is_string()) throw SpecError(field(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "discrete") {
    only_keys(j, path, {"type", "atoms", "probs"});
    auto atoms = numbers(require(j, path, "atoms"), field(path, "atoms"));
    if (atoms.empty()) throw SpecError(field(path, "atoms"), "at least one atom is required");
    std::vector<double> probs;
    if (j.contains("probs")) {
      probs = numbers(j["probs"], field(path, "probs"));
      if (probs.size() != atoms.size()) throw SpecError(field(path, "probs"), "one probability per atom is required");
    } else {
      probs.assign(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
    }
    return guarded(path, [&] { return LossDistribution::discrete(std::move(atoms), std::move(probs)); });
  }
  if (t == "empirical") {
    only_keys(j, path, {"type", "sample"});
    auto xs = numbers(require(j, path, "sample"), field(path, "sample"));
    return guarded(field(path, "sample"), [&] { return LossDistribution::empirical(std::move(xs)); });
  }
  if (t == "csv") {
    only_keys(j, path, {"type", "path"});
    const Json& p = require(j, path, "path");
    if (!p.is_string()) throw SpecError(field(path, "path"), "expected a string");
    return guarded(field(path, "path"), [&] { return ingest_csv(resolve(base_dir, p.get<std::string>())); });
  }
  if (t == "uniform") {
    only_keys(j, path, {"type", "lower", "upper"});
    const double lo = number(require(j, path, "lower"), field(path, "lower"));
    const double hi = number(require(j, path, "upper"), field(path, "upper"));
    return guarded(path, [&] { return LossDistribution::uniform(lo, hi); });
  }
  if (t == "exponential") {
    only_keys(j, path, {"type", "rate"});
    const double r = number(require(j, path, "rate"), field(path, "rate"));
    return guarded(field(path, "rate"), [&] { return LossDistribution::exponential(r); });
  }
  if (t == "point") {
    only_keys(j, path, {"type", "value"});
    return LossDistribution::point_mass(number(require(j, path, "value"), field(path, "value")));
  }
  throw SpecError(field(path, "type"), "unknown distribution type `" + t + "`");
}

LossDistribution parse_distribution_shorthand(std::string_view s, const std::string& path,
                                    const std::filesystem::path& base_dir) {
  const std::size_t colon = s.find(':');
  if (colon == std::string_view::npos) throw SpecError(path, "unknown distribution shorthand `" + std::string(s) + "`");
  const std::string_view head = s.substr(0, colon);
  const std::string_view rest = s.substr(colon + 1);
  if (head == "csv") return guarded(path, [&] { return ingest_csv(resolve(base_dir, rest)); });
  if (head == "exp") {
    const double r = parse_number(rest, path);
    return guarded(path, [&] { return LossDistribution::exponential(r); });
  }
  if (head == "point") return LossDistribution::point_mass(parse_number(rest, path));
  if (head == "uniform") {
    const auto parts = split(rest, ':');
    if (parts.size() != 2) throw SpecError(path, "expected uniform:LOWER:UPPER");
    const double lo = parse_number(parts[0], path);
    const double hi = parse_number(parts[1], path);
    return guarded(path, [&] { return LossDistribution::uniform(lo, hi); });
  }
  if (head == "atoms") {
    std::vector<double> atoms;
    for (auto part : split(rest, ',')) atoms.push_back(parse_number(part, path));
    std::vector<double> probs(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
    return guarded(path, [&] { return LossDistribution::discrete(std::move(atoms), std::move(probs)); });
  }
  throw SpecError(path, "unknown distribution shorthand `" + std::string(s) + "`");
}

ProblemSpec parse_problem(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw SpecError("", "expected a problem object");
  only_keys(j, "", {"agents", "total", "options"});
  const Json& agents = require(j, "", "agents");
  if (!agents.is_array() || agents.empty()) throw SpecError("agents", "expected a non-empty array");
  std::vector<AgentSpec> out;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string p = index("agents", i);
    const Json& a = agents[i];
    if (!a.is_object()) throw SpecError(p, "expected an agent object");
    only_keys(a, p, {"kernel", "lambda"});
    AgentSpec spec{parse_kernel(require(a, p, "kernel"), field(p, "kernel")), 1.0};
    if (a.contains("lambda")) {
      spec.weight = number(a["lambda"], field(p, "lambda"));
      if (!(spec.weight > 0.0)) throw SpecError(field(p, "lambda"), "lambda must be positive");
    }
    out.push_back(std::move(spec));
  }
  ProblemSpec spec{std::move(out), parse_distribution(require(j, "", "total"), "total", base_dir), {}};
  if (j.contains("options")) {
    const Json& o = j["options"];
    if (!o.is_object()) throw SpecError("options", "expected an object");
    only_keys(o, "options", {"cells", "seed", "tol", "iters", "trunc"});
    if (o.contains("cells")) spec.options.cells = count(o["cells"], "options.cells");
    if (o.contains("seed")) spec.options.seed = count(o["seed"], "options.seed");
    if (o.contains("iters")) spec.options.iters = count(o["iters"], "options.iters");
    if (o.contains("tol")) {
      spec.options.tol = number(o["tol"], "options.tol");
      if (!(*spec.options.tol > 0.0)) throw SpecError("options.tol", "tolerance must be positive");
    }
    if (o.contains("trunc")) spec.options.trunc = numbers(o["trunc"], "options.trunc");
  }
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SpecError(file.string(), "cannot open spec file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SpecError(file.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(j, file.parent_path());
}

}  // namespace riskalloc
