#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "mdpdesign/generator.hpp"
#include "mdpdesign/io.hpp"
#include "mdpdesign/oracle.hpp"
#include "test_support.hpp"

using namespace mdpdesign;
using namespace testsupport;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Value after "key: " on its own line of the solve report.
std::string field(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

std::string save(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  const auto path = (dir / name).string();
  write_text_file(path, text);
  return path;
}

/// Drops the timing column so that runs can be compared.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string result;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream cs(line);
    for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
    cells.erase(cells.begin() + 10);
    for (const auto& c : cells) result += c + ',';
    result += '\n';
  }
  return result;
}

}  // namespace

TEST_CASE("generate writes the instance for the seed, byte for byte") {
  const auto dir = scratch_dir("cli_generate");
  const std::vector<std::string> args = {"generate", "-n", "4", "-m", "3", "-K", "2", "-S", "3", "-A", "2", "--seed", "42"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  GenParams p;
  p.n = 4;
  p.m = 3;
  p.num_scenarios = 2;
  p.num_states = 3;
  p.num_actions = 2;
  p.seed = 42;
  CHECK(instance_from_json(a.out) == generate_instance(p));

  auto to_file = args;
  to_file.insert(to_file.end(), {"-o", (dir / "g.json").string()});
  REQUIRE(run(to_file).code == 0);
  CHECK(read_text_file((dir / "g.json").string()) == a.out);

  auto other = args;
  other.back() = "43";
  CHECK(run(other).out != a.out);
}

TEST_CASE("input errors exit with 2") {
  const auto dir = scratch_dir("cli_errors");
  CHECK(run({"generate", "-n", "21", "-m", "3", "-K", "2", "-S", "3", "-A", "2"}).code == cli::kExitInputError);
  CHECK(run({"generate", "-n", "4"}).code == cli::kExitInputError);
  CHECK(run({"frobnicate"}).code == cli::kExitInputError);
  CHECK(run({"solve", (dir / "missing.json").string()}).code == cli::kExitInputError);
  const auto bad = run({"solve", save(dir, "bad.json", R"({"version": 1, "n1": 0})")});
  CHECK(bad.code == cli::kExitInputError);
  CHECK(bad.err.find("violation") != std::string::npos);
  CHECK(run({"solve", save(dir, "x.json", "{}"), "--method", "simplex"}).code == cli::kExitInputError);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("solve by both methods agrees, and the solution validates") {
  const auto dir = scratch_dir("cli_solve");
  TestRng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = random_binary_instance(rng);
    const auto path = save(dir, "i.json", instance_to_json(inst));
    const auto oracle = run({"solve", path, "--method", "oracle"});
    REQUIRE(oracle.code == cli::kExitOk);
    const double expected = std::stod(field(oracle.out, "objective"));
    CHECK(rel_diff(expected, brute_force_solve(inst).objective) <= 1e-9);  // report prints 10 digits
    for (const std::string bigm : {"uniform", "per-state-lp"}) {
      const auto sol_path = (dir / ("s_" + bigm + ".json")).string();
      const auto mip = run({"solve", path, "--method", "mip", "--bigm", bigm, "-o", sol_path});
      REQUIRE(mip.code == cli::kExitOk);
      CHECK(field(mip.out, "status") == "optimal");
      CHECK(rel_diff(std::stod(field(mip.out, "objective")), expected) <= 1e-6);
      const auto ok = run({"validate", sol_path, "--instance", path});
      CHECK(ok.code == cli::kExitOk);
      CHECK(ok.out.find("valid solution") != std::string::npos);
    }
  }
}

TEST_CASE("validate rejects a tampered solution") {
  const auto dir = scratch_dir("cli_tamper");
  TestRng rng(72);
  const auto inst = random_binary_instance(rng);
  const auto path = save(dir, "i.json", instance_to_json(inst));
  const auto sol_path = (dir / "s.json").string();
  REQUIRE(run({"solve", path, "-o", sol_path}).code == cli::kExitOk);
  CHECK(run({"validate", path}).code == cli::kExitOk);
  CHECK(run({"validate", sol_path}).code == cli::kExitInputError);

  auto doc = json::parse(read_text_file(sol_path));
  doc["objective"] = doc["objective"].get<double>() + 1.0;
  const auto tampered = save(dir, "t.json", doc.dump());
  const auto r = run({"validate", tampered, "--instance", path});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("does not recompute") != std::string::npos);
  CHECK(r.err.find("re-solved objective") != std::string::npos);

  doc = json::parse(read_text_file(sol_path));
  doc["per_scenario"][0]["u"] = doc["per_scenario"][0]["u"].get<double>() * 2.0 + 1.0;
  CHECK(run({"validate", save(dir, "t2.json", doc.dump()), "--instance", path}).code == cli::kExitInputError);
}

TEST_CASE("an empty design space exits with 3") {
  const auto dir = scratch_dir("cli_infeasible");
  TestRng rng(73);
  const auto base = random_binary_instance(rng);
  auto d = base.design().data();
  d.constraints.push_back({std::vector<double>(base.num_design_vars(), 1.0), Relation::GreaterEqual,
                           static_cast<double>(base.num_design_vars()) + 1.0, ""});
  const DesignMdpInstance inst(DesignSpace(d), base.design_cost(), base.scenarios());
  const auto path = save(dir, "i.json", instance_to_json(inst));
  CHECK(run({"solve", path, "--method", "oracle"}).code == cli::kExitInfeasible);
  const auto mip = run({"solve", path});
  CHECK(mip.code == cli::kExitInfeasible);
  CHECK(field(mip.out, "status") == "infeasible");
  CHECK(run({"enumerate", path}).code == cli::kExitInfeasible);
}

TEST_CASE("shrunken big-M values are caught and exit with 4") {
  const auto dir = scratch_dir("cli_bigm");
  TestRng rng(74);
  const auto path = save(dir, "i.json", instance_to_json(random_binary_instance(rng)));
  const auto r = run({"solve", path, "--bigm-scale", "1e-3"});
  CHECK(r.code == cli::kExitBigMFailure);
  CHECK(r.err.find("big-M validity check failed") != std::string::npos);
  CHECK(run({"solve", path, "--bigm-scale", "1"}).code == cli::kExitOk);
}

TEST_CASE("enumerate lists the feasible designs") {
  const auto dir = scratch_dir("cli_enumerate");
  TestRng rng(75);
  const auto inst = random_binary_instance(rng);
  const auto path = save(dir, "i.json", instance_to_json(inst));
  const auto list = (dir / "d.txt").string();
  const auto r = run({"enumerate", path, "-o", list});
  REQUIRE(r.code == cli::kExitOk);
  const auto designs = enumerate_designs(inst.design());
  std::istringstream in(read_text_file(list));
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == designs.size());
  CHECK(r.out.find("feasible designs: " + std::to_string(designs.size())) != std::string::npos);
  CHECK(run({"enumerate", path, "--max-points", "1"}).code == cli::kExitInputError);
}

TEST_CASE("exports are written next to the solve") {
  const auto dir = scratch_dir("cli_export");
  TestRng rng(76);
  const auto path = save(dir, "i.json", instance_to_json(random_binary_instance(rng)));
  const auto lp = (dir / "m.lp").string();
  const auto r = run({"solve", path, "--export-lp", lp, "--export-bilevel", (dir / "bl").string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto text = read_text_file(lp);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Binary") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "bl" / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "bl" / "leader.lp"));
}

TEST_CASE("build compiles application configs that then solve") {
  const auto dir = scratch_dir("cli_build");
  const auto config = save(dir, "q.json", R"({
    "servers": [{"recruit_cost": 2, "limit": 1}], "total_limit": 1, "capacity": [2], "rejection_penalty": 5,
    "scenarios": [{"probability": 1, "discount": 0.9, "success_prob": [[0.9]], "reward": [[30]],
                   "operating_cost": [1], "arrival_model": "poisson", "arrival_rate": [3]}]})");
  const auto out = (dir / "q_inst.json").string();
  REQUIRE(run({"build", "queue", "-c", config, "-o", out}).code == cli::kExitOk);
  const auto oracle = run({"solve", out, "--method", "oracle"});
  const auto mip = run({"solve", out});
  REQUIRE(oracle.code == cli::kExitOk);
  REQUIRE(mip.code == cli::kExitOk);
  CHECK(rel_diff(std::stod(field(mip.out, "objective")), std::stod(field(oracle.out, "objective"))) <= 1e-6);
  CHECK(run({"build", "submarine", "-c", config}).code == cli::kExitInputError);
  CHECK(run({"build", "inventory", "-c", config}).code == cli::kExitInputError);
}

TEST_CASE("bench is deterministic apart from timings") {
  const auto dir = scratch_dir("cli_bench");
  const auto grid = save(dir, "grid.csv", "n,m,K,S,A\n2,1,1,2,2\n4,2,2,2,2\n");
  auto bench = [&](const std::string& name, const std::string& seed) {
    const auto csv = (dir / name).string();
    const auto r = run({"bench", "--grid", grid, "--reps", "2", "--seed", seed, "-o", csv});
    REQUIRE(r.code == cli::kExitOk);
    return read_text_file(csv);
  };
  const auto a = bench("a.csv", "5");
  const auto b = bench("b.csv", "5");
  const auto c = bench("c.csv", "6");
  CHECK(without_timing(a) == without_timing(b));
  CHECK(without_timing(a) != without_timing(c));
  std::istringstream in(a);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 5);
  CHECK(a.rfind(cli::bench_csv_header(), 0) == 0);
  CHECK(std::filesystem::exists(dir / "a.csv.summary.csv"));
  CHECK(std::filesystem::exists(dir / "a.csv.trend.txt"));
  CHECK(run({"bench", "--grid", grid, "--reps", "0", "-o", (dir / "z.csv").string()}).code == cli::kExitInputError);
}

TEST_CASE("the scaled published grid has 25 rows in five blocks") {
  const auto grid = cli::table1_grid({});
  REQUIRE(grid.size() == 25);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i].block == static_cast<int>(i / 5));
    CHECK(grid[i].n % 2 == 0);
    CHECK(grid[i].n >= 2);
    CHECK(std::min({grid[i].m, grid[i].K, grid[i].S, grid[i].A}) >= 1);
  }
  const auto full = cli::table1_grid({1, 1, 1, 1, 1});
  CHECK(full[0].n == 20);
  CHECK(full[0].m == 40);
  CHECK(full[0].K == 20);
  CHECK(full[0].S == 10);
  CHECK(full[0].A == 20);
  CHECK(full[4].n == 320);
  CHECK(full[24].A == 80);
}
