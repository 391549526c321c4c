#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mdpdesign::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // solver limit reached or unexpected error
  kExitInputError = 2,
  kExitInfeasible = 3,
  kExitBigMFailure = 4,
};

/// Runs one command line (without the program name). Safe to call in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for `bench`, read from this environment variable (default 1).
inline constexpr const char* kWorkersEnv = "MDPDESIGN_WORKERS";

struct GridRow {
  int n = 0, m = 0, K = 0, S = 0, A = 0;
  int block = -1;  // index of the varied dimension (0..4 = n, m, K, S, A), -1 for custom grids
};

struct Divisors {
  double n = 10, m = 10, K = 10, S = 4, A = 10;
};

/// The 25 published rows divided per dimension by `div` (rounded, floored at
/// 1; n additionally rounded up to an even number).
std::vector<GridRow> table1_grid(const Divisors& div);

/// Reads a custom grid: CSV with header `n,m,K,S,A`.
std::vector<GridRow> read_grid_file(const std::string& path);

struct BenchOptions {
  std::vector<GridRow> grid;
  int reps = 5;
  std::uint64_t seed = 1;
  std::string method = "mip";
  std::string bigm = "uniform";
  std::int64_t node_limit = 1'000'000;
  int workers = 1;
};

struct BenchRecord {
  GridRow row;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string status;
  double objective = 0.0;
  bool has_objective = false;
  double solve_ms = 0.0;
  std::int64_t nodes = 0;
};

/// Seed of run (row, rep), derived from the base seed.
std::uint64_t derive_run_seed(std::uint64_t base, std::size_t row, int rep);

/// Runs the sweep; records arrive at `on_record` in (row, rep) order from a
/// single thread at a time.
std::vector<BenchRecord> run_bench(const BenchOptions& options,
                                   const std::function<void(const BenchRecord&)>& on_record = {});

std::string bench_csv_header();
std::string bench_csv_line(const BenchRecord& r);
std::string bench_summary_csv(const std::vector<GridRow>& grid, const std::vector<BenchRecord>& records);
std::string bench_trend_report(const std::vector<GridRow>& grid, const std::vector<BenchRecord>& records);

}  // namespace mdpdesign::cli
