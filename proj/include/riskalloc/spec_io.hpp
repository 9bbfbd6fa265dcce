#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskalloc/allocation.hpp"
#include "riskalloc/distribution.hpp"
#include "riskalloc/kernel.hpp"

namespace riskalloc {

using Json = nlohmann::ordered_json;

// Kernel specs:
//   {"type": "var", "alpha": a}          "var:A"
//   {"type": "cvar", "alpha": a}         "cvar:A"
//   {"type": "expectation"}              "expectation"
//   {"type": "prop_hazard", "r": r}      "ph:R"
//   {"type": "points", "points": [[t, v], ..., {"t": t, "jump": [left, right]}, ...]}
// In `points` a repeated t, or a jump marker, gives Φ(t-) then Φ(t).
DistortionKernel parse_kernel(const Json& j, const std::string& path);
DistortionKernel parse_kernel_shorthand(std::string_view shorthand, const std::string& path);

// Distribution specs (CSV paths resolve against `base_dir`):
//   {"type": "discrete", "atoms": [...], "probs": [...]}   "atoms:1,2,3" (equal weights)
//   {"type": "empirical", "sample": [...]}
//   {"type": "csv", "path": "file.csv"}                    "csv:PATH"
//   {"type": "uniform", "lower": a, "upper": b}            "uniform:A:B"
//   {"type": "exponential", "rate": r}                     "exp:R"
//   {"type": "point", "value": c}                          "point:C"
LossDistribution parse_distribution(const Json& j, const std::string& path, const std::filesystem::path& base_dir);
LossDistribution parse_distribution_shorthand(std::string_view shorthand, const std::string& path,
                                    const std::filesystem::path& base_dir);

struct ProblemOptions {
  std::optional<std::size_t> cells;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> iters;
  std::vector<double> trunc;
};

// {"agents": [{"kernel": K, "lambda": 1.0}, ...], "total": D, "options": {...}}.
// `total` is checked as a law only; the nonnegativity needed for allocation
// is a domain condition left to the commands.
struct ProblemSpec {
  std::vector<AgentSpec> agents;
  LossDistribution total;
  ProblemOptions options;
};

ProblemSpec parse_problem(const Json& j, const std::filesystem::path& base_dir);
ProblemSpec load_problem(const std::filesystem::path& file);

}  // namespace riskalloc
