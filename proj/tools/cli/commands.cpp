#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mdpdesign/applications.hpp"
#include "mdpdesign/errors.hpp"
#include "mdpdesign/generator.hpp"
#include "mdpdesign/io.hpp"
#include "mdpdesign/oracle.hpp"
#include "mdpdesign/reformulation.hpp"

namespace mdpdesign::cli {

namespace {

constexpr double kConsistencyTol = 1e-6;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

int report_violations(std::ostream& err, const std::string& context, const std::vector<std::string>& violations) {
  err << context << ": " << violations.size() << " violation(s)\n";
  for (const auto& v : violations) err << "  - " << v << '\n';
  return kExitInputError;
}

DesignMdpInstance load_instance(const std::string& path) { return instance_from_json(read_text_file(path)); }

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_text_file(path, text);
}

int exit_for_status(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return kExitOk;
    case SolveStatus::Infeasible: return kExitInfeasible;
    default: return kExitFailure;
  }
}

// ------------------------------------------------------------------ generate

struct GenerateArgs {
  GenParams params;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const auto instance = generate_instance(a.params);
  emit(a.out, instance_to_json(instance), out);
  std::ostream& info = a.out.empty() || a.out == "-" ? err : out;
  const auto& p = a.params;
  info << "generated instance: n=" << p.n << " (" << p.n / 2 << " binary, " << p.n - p.n / 2 << " integer) m=" << p.m
       << " K=" << p.num_scenarios << " S=" << p.num_states << " A=" << p.num_actions << " seed=" << p.seed << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::string method = "mip";
  std::string bigm = "uniform";
  std::string out;
  std::string export_lp;
  std::string export_bilevel;
  std::int64_t node_limit = 1'000'000;
  double bigm_scale = 1.0;
};

BigMKind parse_bigm(const std::string& s) { return s == "per-state-lp" ? BigMKind::PerStateLp : BigMKind::Uniform; }

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const auto instance = load_instance(a.instance);
  if (!a.export_bilevel.empty()) out << "bilevel manifest: " << write_bilevel_export(instance, a.export_bilevel) << '\n';
  if (!a.export_lp.empty()) {
    const auto mip = build_single_level_mip(instance, compute_big_m(instance, parse_bigm(a.bigm)));
    write_text_file(a.export_lp, to_lp_format(mip.model));
    out << "reformulated model: " << a.export_lp << '\n';
  }

  IntegratedSolution sol;
  std::string bigm;
  if (a.method == "oracle") {
    sol = brute_force_solve(instance);
  } else {
    SolverConfig config;
    config.options.node_limit = a.node_limit;
    config.bigm_scale = a.bigm_scale;
    try {
      sol = solve_integrated(instance, parse_bigm(a.bigm), config);
    } catch (const BigMValidityError& e) {
      err << "big-M validity check failed: MIP objective "
          << (std::isinf(e.mip_objective()) ? std::string("infeasible") : num(e.mip_objective()))
          << ", re-derived objective " << num(e.rederived_objective()) << '\n';
      return kExitBigMFailure;
    }
    bigm = a.bigm;
  }
  if (!a.out.empty()) write_text_file(a.out, solution_to_json(sol, bigm));
  out << "status: " << to_string(sol.status) << '\n';
  if (sol.optimal()) {
    out << "objective: " << num(sol.objective) << '\n';
    out << "x: " << join(sol.x) << '\n';
    for (std::size_t k = 0; k < sol.per_scenario.size(); ++k)
      out << "u[" << k << "]: " << num(sol.per_scenario[k].expected_cost) << '\n';
  }
  out << "method: " << to_string(sol.method) << (bigm.empty() ? "" : " (" + bigm + ")") << '\n';
  out << "solve_ms: " << num(sol.stats.solve_ms) << " nodes: " << sol.stats.nodes
      << " designs_evaluated: " << sol.stats.designs_evaluated << '\n';
  return exit_for_status(sol.status);
}

// ----------------------------------------------------------------- enumerate

struct EnumerateArgs {
  std::string instance;
  std::uint64_t max_points = 1'000'000;
  std::string out;
};

int cmd_enumerate(const EnumerateArgs& a, std::ostream& out, std::ostream&) {
  const auto instance = load_instance(a.instance);
  OracleOptions opt;
  opt.max_box_points = a.max_points;
  DesignEnumerator walk(instance.design(), opt);
  std::ostringstream lines;
  std::size_t count = 0;
  while (auto x = walk.next()) {
    lines << join(*x) << '\n';
    ++count;
  }
  emit(a.out, lines.str(), out);
  out << "feasible designs: " << count << " of " << walk.box_points() << " box points\n";
  return count == 0 ? kExitInfeasible : kExitOk;
}

// ------------------------------------------------------------------ validate

struct ValidateArgs {
  std::string file;
  std::string instance;
};

std::vector<std::string> check_solution(const DesignMdpInstance& instance, const SolutionDocument& doc) {
  std::vector<std::string> bad;
  const auto& sol = doc.solution;
  if (!sol.optimal()) {
    if (!sol.x.empty() || !sol.per_scenario.empty()) bad.push_back("non-optimal solution carries a design");
    return bad;
  }
  if (sol.x.size() != instance.num_design_vars()) {
    bad.push_back("x has " + std::to_string(sol.x.size()) + " entries, expected " +
                  std::to_string(instance.num_design_vars()));
    return bad;
  }
  if (!check_design_feasible(instance.design(), sol.x)) bad.push_back("x is not feasible for the design space");
  if (sol.per_scenario.size() != instance.scenarios().size()) {
    bad.push_back("per_scenario has " + std::to_string(sol.per_scenario.size()) + " entries, expected " +
                  std::to_string(instance.scenarios().size()));
    return bad;
  }
  const auto scale = [](double v) { return std::max(1.0, std::abs(v)); };
  const double parts = recompute_objective(instance, sol);
  if (std::abs(parts - sol.objective) > kConsistencyTol * scale(sol.objective))
    bad.push_back("objective " + num(sol.objective) + " does not recompute from its parts (" + num(parts) + ")");
  const auto truth = evaluate_design(instance, sol.x);
  if (std::abs(truth.objective - sol.objective) > kConsistencyTol * scale(truth.objective))
    bad.push_back("objective " + num(sol.objective) + " differs from the re-solved objective " + num(truth.objective));
  for (std::size_t k = 0; k < sol.per_scenario.size(); ++k) {
    const auto& got = sol.per_scenario[k];
    const auto& want = truth.per_scenario[k];
    const std::string where = "scenario " + std::to_string(k);
    if (std::abs(got.expected_cost - want.expected_cost) > kConsistencyTol * scale(want.expected_cost))
      bad.push_back(where + ": u = " + num(got.expected_cost) + " differs from the re-solved " + num(want.expected_cost));
    if (got.value.values.size() != want.value.values.size()) {
      bad.push_back(where + ": value vector has the wrong length");
    } else {
      double u = 0.0;
      const auto& alpha = instance.scenarios()[k].initial_dist();
      for (std::size_t s = 0; s < alpha.size(); ++s) u += alpha[s] * got.value.values[s];
      if (std::abs(u - got.expected_cost) > 1e-8 * scale(u))
        bad.push_back(where + ": u differs from alpha . values");
    }
    if (got.rule.action_of.size() != want.rule.action_of.size()) bad.push_back(where + ": rule has the wrong length");
    for (int action : got.rule.action_of)
      if (action < 0 || action >= instance.scenarios()[k].num_actions()) {
        bad.push_back(where + ": rule uses an action out of range");
        break;
      }
  }
  return bad;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  const std::string text = read_text_file(a.file);
  if (detect_document_kind(text) == DocumentKind::Instance) {
    const auto instance = instance_from_json(text);
    out << "valid instance: n=" << instance.num_design_vars() << " rows=" << instance.design().constraints().size()
        << " scenarios=" << instance.scenarios().size() << '\n';
    return kExitOk;
  }
  const auto doc = solution_from_json(text);
  if (a.instance.empty()) {
    err << "validating a solution requires --instance\n";
    return kExitInputError;
  }
  const auto instance = load_instance(a.instance);
  if (auto bad = check_solution(instance, doc); !bad.empty()) return report_violations(err, a.file, bad);
  out << "valid solution: status=" << to_string(doc.solution.status) << " objective=" << num(doc.solution.objective)
      << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- build

struct BuildArgs {
  std::string model;
  std::string config;
  std::string out;
};

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  const std::string text = read_text_file(a.config);
  std::optional<DesignMdpInstance> instance;
  if (a.model == "reliability") instance.emplace(app::build_reliability_instance(app::parse_reliability_config(text)));
  else if (a.model == "inventory") instance.emplace(app::build_inventory_instance(app::parse_inventory_config(text)));
  else instance.emplace(app::build_queue_instance(app::parse_queue_config(text)));
  emit(a.out, instance_to_json(*instance), out);
  std::ostream& info = a.out.empty() || a.out == "-" ? err : out;
  std::size_t states = 0;
  for (const auto& mdp : instance->scenarios()) states = std::max<std::size_t>(states, mdp.num_states());
  info << "built " << a.model << " instance: n=" << instance->num_design_vars()
       << " scenarios=" << instance->scenarios().size() << " max states=" << states << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- bench

struct BenchArgs {
  std::string grid = "table1";
  std::string divisors;
  int reps = 5;
  std::uint64_t seed = 1;
  std::string method = "mip";
  std::string bigm = "uniform";
  std::int64_t node_limit = 1'000'000;
  std::string out;
  std::string summary;
  std::string trend;
};

Divisors parse_divisors(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  Divisors d;
  if (!(in >> d.n >> d.m >> d.K >> d.S >> d.A) || d.n <= 0 || d.m <= 0 || d.K <= 0 || d.S <= 0 || d.A <= 0)
    throw InvariantError({"--divisors expects five positive numbers n,m,K,S,A"});
  return d;
}

int workers_from_env() {
  const char* v = std::getenv(kWorkersEnv);
  if (!v || !*v) return 1;
  const int w = std::atoi(v);
  return w > 0 ? w : 1;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
  BenchOptions opt;
  opt.grid = a.grid == "table1" ? table1_grid(a.divisors.empty() ? Divisors{} : parse_divisors(a.divisors))
                                : read_grid_file(a.grid);
  if (a.reps < 1) throw InvariantError({"--reps must be at least 1"});
  opt.reps = a.reps;
  opt.seed = a.seed;
  opt.method = a.method;
  opt.bigm = a.bigm;
  opt.node_limit = a.node_limit;
  opt.workers = workers_from_env();

  std::ofstream csv(a.out, std::ios::trunc);
  if (!csv) throw Error("cannot open '" + a.out + "' for writing");
  csv << bench_csv_header() << '\n';
  const auto records = run_bench(opt, [&](const BenchRecord& r) { csv << bench_csv_line(r) << '\n' << std::flush; });
  csv.close();

  const std::string summary = a.summary.empty() ? a.out + ".summary.csv" : a.summary;
  const std::string trend = a.trend.empty() ? a.out + ".trend.txt" : a.trend;
  write_text_file(summary, bench_summary_csv(opt.grid, records));
  const std::string report = bench_trend_report(opt.grid, records);
  write_text_file(trend, report);
  out << "runs: " << records.size() << " (" << opt.grid.size() << " rows x " << opt.reps << " reps, "
      << opt.workers << " worker(s))\n";
  out << "csv: " << a.out << "\nsummary: " << summary << "\ntrend: " << trend << '\n' << report;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design of scenario MDPs: generate, solve, enumerate, benchmark and validate instances"};
  app.name("mdpdesign");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Draw a random benchmark instance");
  g->add_option("-n", gen.params.n, "Design variables (even; half binary, half integer)")->required();
  g->add_option("-m", gen.params.m, "Leader constraints")->required();
  g->add_option("-K", gen.params.num_scenarios, "Scenarios")->required();
  g->add_option("-S", gen.params.num_states, "States per scenario")->required();
  g->add_option("-A", gen.params.num_actions, "Actions per scenario")->required();
  g->add_option("--seed", gen.params.seed, "64-bit seed")->default_val(1);
  g->add_option("--out,-o", gen.out, "Output file (default stdout)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve an instance");
  s->add_option("instance", solve.instance, "Instance JSON file")->required();
  s->add_option("--method", solve.method, "mip or oracle")->check(CLI::IsMember({"mip", "oracle"}));
  s->add_option("--bigm", solve.bigm, "uniform or per-state-lp")->check(CLI::IsMember({"uniform", "per-state-lp"}));
  s->add_option("--out,-o", solve.out, "Write the solution JSON here");
  s->add_option("--export-lp", solve.export_lp, "Write the reformulated MIP in LP text format");
  s->add_option("--export-bilevel", solve.export_bilevel, "Write leader/follower LP files and a manifest into this directory");
  s->add_option("--node-limit", solve.node_limit, "Branch-and-bound node limit");
  s->add_option("--bigm-scale", solve.bigm_scale, "Multiply every big-M by this factor")
      ->check(CLI::PositiveNumber);

  EnumerateArgs en;
  auto* e = app.add_subcommand("enumerate", "List the feasible designs of an instance");
  e->add_option("instance", en.instance, "Instance JSON file")->required();
  e->add_option("--max-points", en.max_points, "Largest bound box accepted");
  e->add_option("--out,-o", en.out, "Write designs here (default stdout)");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check an instance or solution file");
  v->add_option("file", val.file, "Instance or solution JSON file")->required();
  v->add_option("--instance", val.instance, "Instance the solution belongs to");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Compile an application config into an instance");
  b->add_option("model", build.model, "reliability, inventory or queue")
      ->required()
      ->check(CLI::IsMember({"reliability", "inventory", "queue"}));
  b->add_option("--config,-c", build.config, "Application config JSON")->required();
  b->add_option("--out,-o", build.out, "Output file (default stdout)");

  BenchArgs bench;
  auto* bn = app.add_subcommand("bench", "Run a benchmark sweep");
  bn->add_option("--grid", bench.grid, "table1 or a CSV file with columns n,m,K,S,A");
  bn->add_option("--divisors", bench.divisors, "Per-dimension scale divisors n,m,K,S,A for table1 (default 10,10,10,4,10)");
  bn->add_option("--reps", bench.reps, "Repetitions per grid row");
  bn->add_option("--seed", bench.seed, "Base seed");
  bn->add_option("--method", bench.method, "mip or oracle")->check(CLI::IsMember({"mip", "oracle"}));
  bn->add_option("--bigm", bench.bigm, "uniform or per-state-lp")->check(CLI::IsMember({"uniform", "per-state-lp"}));
  bn->add_option("--node-limit", bench.node_limit, "Branch-and-bound node limit per run");
  bn->add_option("--out,-o", bench.out, "CSV of runs")->required();
  bn->add_option("--summary", bench.summary, "Per-row summary CSV (default <out>.summary.csv)");
  bn->add_option("--trend", bench.trend, "Trend report (default <out>.trend.txt)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out, err);
    if (s->parsed()) return cmd_solve(solve, out, err);
    if (e->parsed()) return cmd_enumerate(en, out, err);
    if (v->parsed()) return cmd_validate(val, out, err);
    if (b->parsed()) return cmd_build(build, out, err);
    if (bn->parsed()) return cmd_bench(bench, out, err);
  } catch (const InvariantError& ex) {
    return report_violations(err, "invalid input", ex.violations());
  } catch (const UnsupportedDesignError& ex) {
    err << "unsupported design: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const SizeLimitError& ex) {
    err << "size limit: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const UnboundedDesignError& ex) {
    err << "unbounded design: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const DimensionError& ex) {
    err << "dimension mismatch: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& ex) {
    err << "unexpected error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitInputError;
}

}  // namespace mdpdesign::cli
