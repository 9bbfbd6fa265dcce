#include "riskalloc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskalloc/allocation.hpp"
#include "riskalloc/duality.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/oracles.hpp"
#include "riskalloc/risk.hpp"
#include "riskalloc/rng.hpp"
#include "riskalloc/spec_io.hpp"

namespace riskalloc {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kProbeSamples = 1000;
constexpr std::size_t kMonteCarloSamples = 20000;
constexpr std::size_t kConstancyTrials = 100;
constexpr std::uint64_t kDefaultIters = 2000;

// Verification failures are reported through the exit code, not exceptions.
struct VerificationFailure {};

struct ProblemArgs {
  std::string spec;
  std::string total;
  std::vector<std::string> kernels;
  std::vector<double> lambdas;
};

struct Knobs {
  std::uint64_t seed = 0;
  double tol = 1e-9;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("--spec", a.spec, "problem spec JSON file");
  cmd->add_option("--total", a.total, "total loss shorthand (atoms:1,2  exp:R  uniform:A:B  point:C  csv:PATH)");
  cmd->add_option("--kernel", a.kernels, "agent kernel shorthand (var:A  cvar:A  expectation  ph:R), repeatable");
  cmd->add_option("--lambda", a.lambdas, "agent weight, repeatable, one per agent");
}

void add_knobs(CLI::App* cmd, Knobs& k) {
  k.seed_opt = cmd->add_option("--seed", k.seed, "random seed (default 0)");
  k.tol_opt = cmd->add_option("--tol", k.tol, "tolerance (default 1e-9)");
}

ProblemSpec load(const ProblemArgs& a) {
  std::optional<ProblemSpec> ps;
  if (!a.spec.empty()) ps = load_problem(a.spec);
  if (!ps) {
    if (a.total.empty()) throw SpecError("--total", "required when no --spec is given");
    if (a.kernels.empty()) throw SpecError("--kernel", "at least one kernel is required when no --spec is given");
    ps.emplace(ProblemSpec{{}, parse_distribution_shorthand(a.total, "--total", {}), {}});
  } else if (!a.total.empty()) {
    ps->total = parse_distribution_shorthand(a.total, "--total", {});
  }
  if (!a.kernels.empty()) {
    ps->agents.clear();
    for (std::size_t i = 0; i < a.kernels.size(); ++i)
      ps->agents.push_back({parse_kernel_shorthand(a.kernels[i], "--kernel[" + std::to_string(i) + "]"), 1.0});
  }
  if (!a.lambdas.empty()) {
    if (a.lambdas.size() != ps->agents.size()) throw SpecError("--lambda", "one weight per agent is required");
    for (std::size_t i = 0; i < a.lambdas.size(); ++i) {
      if (!(a.lambdas[i] > 0.0)) throw SpecError("--lambda", "weights must be positive");
      ps->agents[i].weight = a.lambdas[i];
    }
  }
  return *ps;
}

void resolve(Knobs& k, const ProblemOptions& o) {
  if (k.seed_opt->count() == 0 && o.seed) k.seed = *o.seed;
  if (k.tol_opt->count() == 0 && o.tol) k.tol = *o.tol;
  if (!(k.tol > 0.0)) throw SpecError("--tol", "tolerance must be positive");
}

std::string describe(const LossDistribution& d) {
  if (!d.is_discrete()) return d.describe();
  return "discrete(" + std::to_string(d.atoms().size()) + " atoms)";
}

// Shortest round-trip decimal, as in the JSON output.
std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

Json one_based(std::span<const std::size_t> idx) {
  Json out = Json::array();
  for (std::size_t i : idx) out.push_back(i + 1);
  return out;
}

Json knots_json(const PiecewiseMonotoneFn& f) {
  Json out = Json::array();
  for (const Knot& k : f.knots()) out.push_back(Json::array({k.x, k.y}));
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw SpecError("--emit-csv", "cannot write " + p.string());
  f << text;
}

// ---- measure ---------------------------------------------------------------

struct MeasureArgs {
  ProblemArgs problem;
  Knobs knobs;
  std::vector<double> trunc;
};

int cmd_measure(const MeasureArgs& a, Knobs knobs, std::ostream& out) {
  const ProblemSpec ps = load(a.problem);
  resolve(knobs, ps.options);
  const std::vector<double> levels = a.trunc.empty() ? ps.options.trunc : a.trunc;
  Json j;
  j["command"] = "measure";
  j["total"] = describe(ps.total);
  Json ms = Json::array();
  bool consistent = true;
  for (std::size_t i = 0; i < ps.agents.size(); ++i) {
    const DistortionKernel& k = ps.agents[i].kernel;
    Json m;
    m["kernel"] = k.label();
    const bool ok = in_domain(ps.total, k);
    m["in_domain"] = ok;
    if (!ok) throw DomainError("kernel " + std::to_string(i + 1) + " (" + k.label() + ") is not defined on this total");
    const double qf = risk_quantile_form(ps.total, k);
    const double cf = risk_choquet_form(ps.total, k);
    m["quantile_form"] = qf;
    m["choquet_form"] = cf;
    m["difference"] = std::abs(qf - cf);
    consistent = consistent && std::abs(qf - cf) <= knobs.tol * std::max(1.0, std::abs(qf));
    if (!levels.empty()) {
      const RegularityReport r = regularity_check(k, ps.total, levels);
      m["regularity"] = {{"levels", r.levels}, {"gaps", r.gaps}, {"passed", r.passed}};
    }
    ms.push_back(std::move(m));
  }
  j["measures"] = std::move(ms);
  j["forms_agree"] = consistent;
  out << j.dump(2) << '\n';
  if (!consistent) throw VerificationFailure{};
  return kExitOk;
}

// ---- allocate --------------------------------------------------------------

struct AllocateArgs {
  ProblemArgs problem;
  Knobs knobs;
  std::string emit_csv;
};

void emit_csv(const fs::path& dir, const MarketProblem& p, const LevelSelector& sel, const ComonotoneAllocation& alloc) {
  fs::create_directories(dir);
  const PsiCurve psi_curve(p.agents());
  std::string psi = "t,psi\n";
  const auto& pieces = psi_curve.pieces();
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const double end = k + 1 < pieces.size() ? pieces[k + 1].start : 1.0;
    psi += num(pieces[k].start) + "," + num(pieces[k].value) + "\n";
    psi += num(end) + "," + num(psi_curve.left_limit(end)) + "\n";
  }
  psi += "1,0\n";
  write_file(dir / "psi.csv", psi);

  std::string s = "t,winner\n";
  for (const SelectorPiece& piece : sel.pieces()) {
    s += num(piece.start) + "," + std::to_string(piece.winner + 1) + "\n";
    s += num(piece.end) + "," + std::to_string(piece.winner + 1) + "\n";
  }
  write_file(dir / "selector.csv", s);

  // Graphs run to ess sup, or to the 0.999 quantile for unbounded totals.
  const double top = std::isfinite(p.total().ess_sup()) ? p.total().ess_sup() : p.total().quantile(0.999);
  for (std::size_t i = 0; i < alloc.components.size(); ++i) {
    const PiecewiseMonotoneFn& f = alloc.components[i];
    std::string g = "x,f\n";
    double last = -std::numeric_limits<double>::infinity();
    for (const Knot& k : f.knots()) {
      if (k.x < 0.0) continue;
      g += num(k.x) + "," + num(k.y) + "\n";
      last = k.x;
    }
    if (top > last) g += num(top) + "," + num(f(top)) + "\n";
    write_file(dir / ("alloc_" + std::to_string(i + 1) + ".csv"), g);
  }
}

int cmd_allocate(const AllocateArgs& a, Knobs knobs, std::ostream& out) {
  const ProblemSpec ps = load(a.problem);
  resolve(knobs, ps.options);
  const MarketProblem p(ps.agents, ps.total);
  const double value = optimal_value(p);
  const LevelSelector sel = optimal_selector(p.agents());
  const ComonotoneAllocation alloc = optimal_allocation(p);
  const AllocationEvaluation eval = evaluate_allocation_detail(p, alloc);

  Json j;
  j["command"] = "allocate";
  j["total"] = describe(ps.total);
  j["value"] = value;
  j["evaluated_value"] = eval.value;
  Json agents = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    agents.push_back({{"agent", i + 1},
                      {"kernel", p.agents()[i].kernel.label()},
                      {"lambda", p.agents()[i].weight},
                      {"risk", eval.risks[i]},
                      {"weighted_risk", p.agents()[i].weight * eval.risks[i]}});
  }
  j["agents"] = std::move(agents);
  Json selector = Json::array();
  for (const SelectorPiece& piece : sel.pieces()) {
    selector.push_back(
        {{"start", piece.start}, {"end", piece.end}, {"winner", piece.winner + 1}, {"tied", one_based(piece.tied)}});
  }
  j["selector"] = std::move(selector);
  Json ties = Json::array();
  for (const TieRegion& t : sel.tie_regions())
    ties.push_back({{"start", t.start}, {"end", t.end}, {"agents", one_based(t.agents)}});
  j["tie_regions"] = std::move(ties);
  Json comps = Json::array();
  for (std::size_t i = 0; i < alloc.components.size(); ++i) {
    const PiecewiseMonotoneFn& f = alloc.components[i];
    comps.push_back({{"agent", i + 1},
                     {"knots", knots_json(f)},
                     {"left_slope", f.left_slope()},
                     {"right_slope", f.right_slope()}});
  }
  j["allocations"] = std::move(comps);
  const bool agree = std::abs(eval.value - value) <= knobs.tol * std::max(1.0, std::abs(value));
  j["values_agree"] = agree;
  if (!a.emit_csv.empty()) {
    emit_csv(a.emit_csv, p, sel, alloc);
    j["csv_dir"] = a.emit_csv;
  }
  out << j.dump(2) << '\n';
  if (!agree) throw VerificationFailure{};
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  ProblemArgs problem;
  Knobs knobs;
  std::optional<std::size_t> cells;
  double corrupt = 0.0;
};

// A kernel atom at an interior level where the CDF of a discrete law is flat
// makes the empirical estimator jump; Monte Carlo is not informative there.
bool atom_on_cdf_level(const DistortionKernel& k, const LossDistribution& d) {
  if (!d.is_discrete()) return false;
  double cum = 0.0;
  for (double p : d.probs()) {
    cum += p;
    for (const auto& jump : k.jumps())
      if (jump.location < 1.0 && std::abs(jump.location - cum) <= 1e-12) return true;
  }
  return false;
}

int cmd_verify(const VerifyArgs& a, Knobs knobs, std::ostream& out) {
  const ProblemSpec ps = load(a.problem);
  resolve(knobs, ps.options);
  const MarketProblem p(ps.agents, ps.total);
  const std::size_t n = p.size();
  const double tol = knobs.tol;
  const double claimed = optimal_value(p) + a.corrupt;
  const double scale = std::max(1.0, std::abs(claimed));
  bool passed = true;

  Json j;
  j["command"] = "verify";
  j["total"] = describe(ps.total);
  j["claimed_value"] = claimed;
  j["seed"] = knobs.seed;
  j["tol"] = tol;

  // Cells: the atoms when they fit, else a uniform grid within the search limit.
  const std::optional<std::size_t> want = a.cells ? a.cells : ps.options.cells;
  std::vector<double> cells;
  bool aligned = false;
  if (ps.total.is_discrete()) {
    const auto atoms_grid = aligned_cells(ps.total);
    if (!want && atoms_grid.size() - 1 <= kMaxCells &&
        std::pow(static_cast<double>(n), static_cast<double>(atoms_grid.size() - 1)) <= kMaxAssignments) {
      cells = atoms_grid;
      aligned = true;
    } else {
      std::size_t k = want.value_or(kMaxCells);
      if (!want)
        while (k > 1 && std::pow(static_cast<double>(n), static_cast<double>(k)) > kMaxAssignments) --k;
      cells = uniform_cells(ps.total, k);
    }
  } else {
    cells.push_back(0.0);
    const std::size_t k = want.value_or(kMaxCells);
    for (std::size_t c = 1; c < k; ++c) {
      const double q = ps.total.quantile(static_cast<double>(c) / static_cast<double>(k));
      if (q > cells.back()) cells.push_back(q);
    }
    cells.push_back(cells.back() + 1.0);
  }

  Json bf;
  if (ps.total.is_discrete()) {
    const BruteForceResult r = brute_force_comonotone(p, cells);
    const double bound = aligned ? 0.0 : grid_gap_bound(p, cells);
    const double gap = r.value - claimed;
    const bool ok = gap >= -tol * scale && gap <= bound + tol * scale;
    bf = {{"status", ok ? "pass" : "fail"}, {"aligned", aligned},   {"cells", cells},
          {"oracle_value", r.value},        {"gap", gap},           {"bound", bound},
          {"assignment", one_based(r.owners)}, {"evaluated", r.evaluated}};
    passed = passed && ok;
  } else {
    bf = {{"status", "skipped"}, {"reason", "brute force needs a discrete total"}};
  }
  j["brute_force"] = std::move(bf);

  {
    const FractionalProbeResult r = fractional_probe(p, cells, kProbeSamples, knobs.seed, tol);
    const bool ok = r.best >= claimed - tol * scale;
    j["fractional_probe"] = {{"status", ok ? "pass" : "fail"},
                             {"samples", kProbeSamples},
                             {"oracle_value", r.best},
                             {"gap", r.best - claimed}};
    passed = passed && ok;
  }

  {
    const ComonotoneAllocation alloc = optimal_allocation(p);
    const AllocationEvaluation eval = evaluate_allocation_detail(p, alloc);
    Json mc = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const DistortionKernel& k = p.agents()[i].kernel;
      const LossDistribution share = pushforward(ps.total, alloc.components[i]);
      Json e{{"agent", i + 1}, {"claimed_value", eval.risks[i]}};
      if (atom_on_cdf_level(k, share)) {
        e["status"] = "skipped";
        e["reason"] = "kernel atom at a CDF level of a discrete share";
      } else {
        const MonteCarloEstimate m = monte_carlo_risk(share, k, kMonteCarloSamples, substream_seed(knobs.seed, i));
        const double err = std::abs(m.estimate - eval.risks[i]);
        const bool ok = err <= 4.0 * m.standard_error + tol * std::max(1.0, std::abs(eval.risks[i]));
        e["status"] = ok ? "pass" : "fail";
        e["oracle_value"] = m.estimate;
        e["standard_error"] = m.standard_error;
        e["gap"] = m.estimate - eval.risks[i];
        e["bound"] = 4.0 * m.standard_error;
        passed = passed && ok;
      }
      mc.push_back(std::move(e));
    }
    j["monte_carlo"] = std::move(mc);
  }

  bool identical = n >= 2;
  for (std::size_t i = 1; i < n; ++i) identical = identical && p.agents()[i].kernel.same_function(p.agents()[0].kernel);
  if (identical) {
    const ConstancyReport r = remark4_check(p.agents()[0].kernel, ps.total, n, kConstancyTrials, knobs.seed, tol);
    j["constancy"] = {{"status", r.passed ? "pass" : "fail"},
                      {"trials", kConstancyTrials},
                      {"claimed_value", r.reference},
                      {"max_deviation", r.max_deviation}};
    passed = passed && r.passed;
  } else {
    j["constancy"] = {{"status", "skipped"}, {"reason", "agents do not share one kernel"}};
  }

  j["passed"] = passed;
  out << j.dump(2) << '\n';
  if (!passed) throw VerificationFailure{};
  return kExitOk;
}

// ---- bounded ---------------------------------------------------------------

struct BoundedArgs {
  ProblemArgs problem;
  Knobs knobs;
  std::optional<std::uint64_t> iters;
};

Json certificate_json(const UnboundednessCertificate& c) {
  Json vals = Json::array();
  for (double v : c.verification) vals.push_back(v);
  Json pts = Json::array();
  for (double v : kVerificationPoints) pts.push_back(v);
  return {{"kind", to_string(c.kind)},
          {"absorber", c.absorber + 1},
          {"slope", c.slope},
          {"base", c.base},
          {"direction", c.direction},
          {"verification", {{"c", pts}, {"objective", vals}}},
          {"iteration", c.iteration}};
}

std::optional<UnboundednessCertificate> var_mean_for(std::span<const AgentSpec> agents, const FiniteSpace& space,
                                                     std::span<const double> x0) {
  if (agents.size() != 2 || agents[0].weight != agents[1].weight) return std::nullopt;
  const auto is_var = [](const DistortionKernel& k) {
    return k.family() == KernelFamily::var && k.parameter() > 0.0 && k.parameter() < 1.0;
  };
  const auto is_mean = [](const DistortionKernel& k) { return k.same_function(DistortionKernel::expectation()); };
  std::size_t v = 2;
  if (is_var(agents[0].kernel) && is_mean(agents[1].kernel)) v = 0;
  if (is_var(agents[1].kernel) && is_mean(agents[0].kernel)) v = 1;
  if (v == 2) return std::nullopt;
  auto cert = var_mean_certificate(space, agents[v].kernel.parameter(), x0, agents[v].weight);
  if (cert && v == 1) {
    std::swap(cert->base[0], cert->base[1]);
    std::swap(cert->direction[0], cert->direction[1]);
    cert->absorber = 0;
  }
  return cert;
}

int cmd_bounded(const BoundedArgs& a, Knobs knobs, std::ostream& out) {
  const ProblemSpec ps = load(a.problem);
  resolve(knobs, ps.options);
  const MarketProblem p(ps.agents, ps.total);
  if (!ps.total.is_discrete() || ps.total.atoms().size() > FiniteSpace::kMaxAtoms)
    throw PreconditionError("bounded needs a discrete total with at most 12 atoms");
  const FiniteSpace space({ps.total.probs().begin(), ps.total.probs().end()});
  const std::vector<double> x0(ps.total.atoms().begin(), ps.total.atoms().end());
  const auto& agents = p.agents();
  const std::uint64_t iters = a.iters.value_or(ps.options.iters.value_or(kDefaultIters));

  Json j;
  j["command"] = "bounded";
  j["total"] = describe(ps.total);
  const auto report_cert = [&](const UnboundednessCertificate& c, const std::string& reason) {
    const bool ok = verify_certificate(agents, space, c, knobs.tol);
    j["status"] = "UNBOUNDED";
    j["reason"] = reason;
    j["certificate"] = certificate_json(c);
    j["certificate"]["verified"] = ok;
    out << j.dump(2) << '\n';
    if (!ok) throw VerificationFailure{};
    return kExitOk;
  };

  bool equal = true;
  for (const AgentSpec& s : agents) equal = equal && s.weight == agents.front().weight;
  if (!equal) {
    if (auto c = cash_transfer_certificate(agents, space, x0)) return report_cert(*c, "agent weights differ");
  }
  bool coherent = true;
  for (const AgentSpec& s : agents) coherent = coherent && s.kernel.is_convex();
  if (coherent) {
    std::vector<ScenarioSet> sets;
    std::vector<double> weights;
    for (const AgentSpec& s : agents) {
      sets.emplace_back(s.kernel, space);
      weights.push_back(s.weight);
    }
    const FeasibilityReport f = intersection_feasible(sets, weights);
    if (f.feasible) {
      const SupportResult sup = support_value(sets, weights, x0);
      const double value = optimal_value(p);
      const ComonotoneAllocation alloc = optimal_allocation(p);
      std::vector<std::vector<double>> vectors;
      for (const auto& fi : alloc.components) {
        std::vector<double> v;
        for (double x : x0) v.push_back(fi(x));
        vectors.push_back(std::move(v));
      }
      const auto witness = attainability_witness(agents, space, vectors, knobs.tol);
      j["status"] = "BOUNDED";
      j["reason"] = "coherent agents with intersecting scenario sets";
      j["support_value"] = sup.value;
      j["optimal_value"] = value;
      j["difference"] = std::abs(sup.value - value);
      j["scenario_measure"] = sup.maximizer;
      j["attained_by_comonotone_optimum"] = witness.has_value();
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    j["witness"] = f.witness;
  }
  if (auto c = var_mean_for(agents, space, x0)) return report_cert(*c, "VaR agent paired with an expectation agent");
  if (auto c = indicator_pair_certificate(agents, space, x0)) return report_cert(*c, "indicator transfer between two agents");
  if (auto c = randomized_certificate_search(agents, space, x0, iters, knobs.seed))
    return report_cert(*c, "randomized direction search");
  j["status"] = "UNKNOWN";
  j["reason"] = "no certificate found and boundedness not proved";
  j["iterations"] = iters;
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---- counterexample --------------------------------------------------------

struct CounterexampleArgs {
  Knobs knobs;
  double alpha = 0.0;
  double beta = 0.0;
  std::string total = "exp:1";
};

int cmd_counterexample(const CounterexampleArgs& a, Knobs knobs, std::ostream& out) {
  const LossDistribution total = parse_distribution_shorthand(a.total, "--total", {});
  const MoralHazardReport r = moral_hazard_counterexample(a.alpha, a.beta, total, 100000, knobs.seed, knobs.tol);
  const std::vector<PiecewiseMonotoneFn> fs{PiecewiseMonotoneFn::identity(), PiecewiseMonotoneFn::constant(0.0),
                                            PiecewiseMonotoneFn::linear(0.5)};
  const LemmaReport lemma = lemma1_gap_check(a.alpha, a.beta, total, fs);
  Json j;
  j["command"] = "counterexample";
  j["total"] = describe(total);
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["comonotone_optimum"] = r.comonotone_optimum;
  j["non_comonotone_value"] = r.value;
  j["gap"] = r.gap;
  j["lemma_constant"] = r.lemma_constant;
  j["allocation"] = {{"x1", r.x1_description},
                     {"x2", r.x2_description},
                     {"var_alpha_x1", r.var_alpha_x1},
                     {"var_beta_x2", r.var_beta_x2},
                     {"prob_x1_positive", r.prob_x1_positive},
                     {"cdf_identity_error", r.cdf_identity_error}};
  j["sampled"] = {{"n", r.sample_size},
                  {"prob_x1_positive", r.sampled_prob_x1_positive},
                  {"var_beta_x2", r.sampled_var_beta_x2}};
  Json cands = Json::array();
  const char* names[] = {"id", "0", "id/2"};
  for (std::size_t i = 0; i < lemma.candidates.size(); ++i)
    cands.push_back({{"f", names[i]}, {"lhs", lemma.candidates[i].lhs}, {"strict", lemma.candidates[i].strict}});
  j["lemma"] = {{"rhs", lemma.rhs}, {"candidates", cands}, {"passed", lemma.passed}};
  const bool pass = r.passed && lemma.passed;
  j["result"] = pass ? "PASS" : "FAIL";
  out << j.dump(2) << '\n';
  if (!pass) throw VerificationFailure{};
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distortion risk measures and optimal co-monotone risk allocation", "riskalloc"};
  app.require_subcommand(1);

  MeasureArgs measure;
  CLI::App* m = app.add_subcommand("measure", "risk of the total under each kernel, both integral forms");
  add_problem_options(m, measure.problem);
  add_knobs(m, measure.knobs);
  m->add_option("--trunc", measure.trunc, "truncation levels for the regularity check")->delimiter(',');

  AllocateArgs allocate;
  CLI::App* al = app.add_subcommand("allocate", "optimal co-monotone allocation");
  add_problem_options(al, allocate.problem);
  add_knobs(al, allocate.knobs);
  al->add_option("--emit-csv", allocate.emit_csv, "directory for psi.csv, selector.csv and alloc_i.csv");

  VerifyArgs verify;
  CLI::App* v = app.add_subcommand("verify", "cross-check the optimum with brute force and Monte Carlo oracles");
  add_problem_options(v, verify.problem);
  add_knobs(v, verify.knobs);
  v->add_option("--cells", verify.cells, "number of grid cells for the brute-force search");
  v->add_option("--corrupt", verify.corrupt, "test hook: offset added to the claimed value");

  BoundedArgs bounded;
  CLI::App* b = app.add_subcommand("bounded", "decide boundedness of the unconstrained problem on a finite space");
  add_problem_options(b, bounded.problem);
  add_knobs(b, bounded.knobs);
  b->add_option("--iters", bounded.iters, "randomized search iterations");

  CounterexampleArgs ce;
  CLI::App* c = app.add_subcommand("counterexample", "non-comonotone allocation beating the co-monotone optimum");
  add_knobs(c, ce.knobs);
  c->add_option("--alpha", ce.alpha, "VaR level of agent 1")->required();
  c->add_option("--beta", ce.beta, "VaR level of agent 2")->required();
  c->add_option("--total", ce.total, "continuous total (exp:R or uniform:A:B), default exp:1");

  std::vector<std::string> argv_store{"riskalloc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSpec;
  }

  try {
    if (m->parsed()) return cmd_measure(measure, measure.knobs, out);
    if (al->parsed()) return cmd_allocate(allocate, allocate.knobs, out);
    if (v->parsed()) return cmd_verify(verify, verify.knobs, out);
    if (b->parsed()) return cmd_bounded(bounded, bounded.knobs, out);
    if (c->parsed()) return cmd_counterexample(ce, ce.knobs, out);
  } catch (const VerificationFailure&) {
    err << "verification failed\n";
    return kExitVerification;
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << '\n';
    return kExitSpec;
  } catch (const ParseError& e) {
    err << "spec error: " << e.what() << '\n';
    return kExitSpec;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitSpec;
}

}  // namespace riskalloc
