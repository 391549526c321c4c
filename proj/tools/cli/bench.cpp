#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "mdpdesign/errors.hpp"
#include "mdpdesign/generator.hpp"
#include "mdpdesign/oracle.hpp"
#include "mdpdesign/reformulation.hpp"
#include "mdpdesign/rng.hpp"

namespace mdpdesign::cli {

namespace {

// Published grid: base row (80, 40, 20, 10, 20) with one dimension varied per block.
constexpr std::array<int, 5> kBase = {80, 40, 20, 10, 20};
constexpr std::array<std::array<int, 5>, 5> kBlocks = {{
    {20, 40, 80, 160, 320},
    {10, 20, 40, 80, 160},
    {5, 10, 20, 40, 80},
    {2, 4, 8, 16, 32},
    {5, 10, 20, 40, 80},
}};
constexpr std::array<const char*, 5> kDimNames = {"n", "m", "K", "S", "A"};

int scale(int value, double divisor) { return std::max(1, static_cast<int>(std::lround(value / divisor))); }

int dim(const GridRow& r, int d) {
  switch (d) {
    case 0: return r.n;
    case 1: return r.m;
    case 2: return r.K;
    case 3: return r.S;
    default: return r.A;
  }
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

BenchRecord run_one(const BenchOptions& opt, std::size_t row_index, int rep) {
  BenchRecord rec;
  rec.row = opt.grid[row_index];
  rec.rep = rep;
  rec.seed = derive_run_seed(opt.seed, row_index, rep);
  rec.method = opt.method;
  try {
    GenParams p;
    p.n = rec.row.n;
    p.m = rec.row.m;
    p.num_scenarios = rec.row.K;
    p.num_states = rec.row.S;
    p.num_actions = rec.row.A;
    p.seed = rec.seed;
    const auto instance = generate_instance(p);
    IntegratedSolution sol;
    if (opt.method == "oracle") {
      sol = brute_force_solve(instance);
    } else {
      SolverConfig config;
      config.options.node_limit = opt.node_limit;
      sol = solve_integrated(instance, opt.bigm == "per-state-lp" ? BigMKind::PerStateLp : BigMKind::Uniform, config);
    }
    rec.status = to_string(sol.status);
    rec.has_objective = sol.optimal();
    rec.objective = sol.objective;
    rec.solve_ms = sol.stats.solve_ms;
    rec.nodes = sol.stats.nodes;
  } catch (const BigMValidityError&) {
    rec.status = "bigm_validity_failure";
  } catch (const SizeLimitError&) {
    rec.status = "size_limit";
  } catch (const UnsupportedDesignError&) {
    rec.status = "unsupported_design";
  } catch (const UnboundedDesignError&) {
    rec.status = "unbounded_design";
  } catch (const std::exception&) {
    rec.status = "error";
  }
  return rec;
}

double mean_ms(const std::vector<BenchRecord>& records, std::size_t row_index, std::size_t reps,
               int* runs = nullptr, int* optimal = nullptr) {
  double total = 0.0;
  int count = 0, ok = 0;
  for (std::size_t i = row_index * reps; i < (row_index + 1) * reps && i < records.size(); ++i) {
    total += records[i].solve_ms;
    ++count;
    if (records[i].status == "optimal") ++ok;
  }
  if (runs) *runs = count;
  if (optimal) *optimal = ok;
  return count ? total / count : 0.0;
}

}  // namespace

std::vector<GridRow> table1_grid(const Divisors& div) {
  const std::array<double, 5> d = {div.n, div.m, div.K, div.S, div.A};
  std::vector<GridRow> grid;
  for (int b = 0; b < 5; ++b) {
    for (int value : kBlocks[b]) {
      std::array<int, 5> dims = kBase;
      dims[b] = value;
      GridRow r;
      r.block = b;
      r.n = scale(dims[0], d[0]);
      if (r.n % 2 != 0) ++r.n;
      r.m = scale(dims[1], d[1]);
      r.K = scale(dims[2], d[2]);
      r.S = scale(dims[3], d[3]);
      r.A = scale(dims[4], d[4]);
      grid.push_back(r);
    }
  }
  return grid;
}

std::vector<GridRow> read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid file '" + path + "'");
  std::string line;
  std::vector<GridRow> grid;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("n,", 0) == 0) continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    GridRow r;
    if (!(ss >> r.n >> r.m >> r.K >> r.S >> r.A))
      throw InvariantError({"grid file line " + std::to_string(line_no) + ": expected n,m,K,S,A"});
    grid.push_back(r);
  }
  if (grid.empty()) throw InvariantError({"grid file has no rows"});
  return grid;
}

std::uint64_t derive_run_seed(std::uint64_t base, std::size_t row, int rep) {
  return CounterRng::stream(base, StreamTag::RunSeed, row, static_cast<std::uint64_t>(rep)).next_u64();
}

std::vector<BenchRecord> run_bench(const BenchOptions& options,
                                   const std::function<void(const BenchRecord&)>& on_record) {
  const std::size_t reps = static_cast<std::size_t>(std::max(options.reps, 0));
  const std::size_t total = options.grid.size() * reps;
  std::vector<BenchRecord> records(total);
  std::vector<char> done(total, 0);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t flushed = 0;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      auto rec = run_one(options, i / reps, static_cast<int>(i % reps));
      std::lock_guard lock(mu);
      records[i] = std::move(rec);
      done[i] = 1;
      while (flushed < total && done[flushed]) {
        if (on_record) on_record(records[flushed]);
        ++flushed;
      }
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

std::string bench_csv_header() { return "n,m,K,S,A,rep,seed,method,status,objective,solve_ms,nodes"; }

std::string bench_csv_line(const BenchRecord& r) {
  std::ostringstream s;
  s << r.row.n << ',' << r.row.m << ',' << r.row.K << ',' << r.row.S << ',' << r.row.A << ',' << r.rep << ','
    << r.seed << ',' << r.method << ',' << r.status << ',' << (r.has_objective ? fmt("%.17g", r.objective) : "")
    << ',' << fmt("%.3f", r.solve_ms) << ',' << r.nodes;
  return s.str();
}

std::string bench_summary_csv(const std::vector<GridRow>& grid, const std::vector<BenchRecord>& records) {
  const std::size_t reps = grid.empty() ? 0 : records.size() / grid.size();
  std::ostringstream s;
  s << "n,m,K,S,A,varied,runs,optimal_runs,mean_solve_ms\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = grid[i];
    int runs = 0, ok = 0;
    const double mean = mean_ms(records, i, reps, &runs, &ok);
    s << r.n << ',' << r.m << ',' << r.K << ',' << r.S << ',' << r.A << ','
      << (r.block >= 0 ? kDimNames[r.block] : "") << ',' << runs << ',' << ok << ',' << fmt("%.3f", mean) << '\n';
  }
  return s.str();
}

std::string bench_trend_report(const std::vector<GridRow>& grid, const std::vector<BenchRecord>& records) {
  const std::size_t reps = grid.empty() ? 0 : records.size() / grid.size();
  std::ostringstream s;
  s << "mean solve time (ms) per varied dimension\n";
  for (int b = 0; b < 5; ++b) {
    // value -> (sum of row means, row count); rows that scale to the same value are averaged
    std::map<int, std::pair<double, int>> by_value;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i].block != b) continue;
      auto& e = by_value[dim(grid[i], b)];
      e.first += mean_ms(records, i, reps);
      e.second += 1;
    }
    if (by_value.empty()) continue;
    s << kDimNames[b] << ':';
    for (const auto& [value, e] : by_value) s << ' ' << value << '=' << fmt("%.3f", e.first / e.second);
    s << '\n';
    if (b == 2 || b == 3) {
      std::vector<double> focus;
      for (int v : {2, 4, 8})
        if (auto it = by_value.find(v); it != by_value.end()) focus.push_back(it->second.first / it->second.second);
      if (focus.size() == 3) {
        const bool rising = std::is_sorted(focus.begin(), focus.end());
        s << "  trend over " << kDimNames[b] << " in {2,4,8}: " << (rising ? "non-decreasing" : "not monotone") << '\n';
      } else {
        s << "  trend over " << kDimNames[b] << " in {2,4,8}: values not present in the scaled grid\n";
      }
    }
  }
  return s.str();
}

}  // namespace mdpdesign::cli
