#pragma once

// Random model generators and brute-force oracles shared by the tests. The
// oracles deliberately avoid the library code paths they are compared with.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mdpdesign/design.hpp"
#include "mdpdesign/linear_solver.hpp"
#include "mdpdesign/mdp.hpp"

namespace testsupport {

using namespace mdpdesign;

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<double> simplex(int size, double floor = 0.05) {
    std::vector<double> p(size);
    double total = 0.0;
    for (auto& v : p) total += (v = floor + uniform());
    for (auto& v : p) v /= total;
    return p;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct MdpShape {
  int states = 3;
  int actions = 2;
  int design_dim = 0;
  double discount_lo = 0.5;
  double discount_hi = 0.95;
  double g_lo = 0.0;
  double g_hi = 10.0;
  double f_abs = 1.0;
  double probability = 1.0;
  bool sparse = false;  // zero out some transition entries
};

inline ScenarioMdp random_mdp(TestRng& rng, const MdpShape& shape) {
  ScenarioMdp::Data d;
  d.num_states = shape.states;
  d.num_actions = shape.actions;
  d.discount = rng.uniform(shape.discount_lo, shape.discount_hi);
  d.probability = shape.probability;
  d.initial_dist = rng.simplex(shape.states);
  d.transition.resize(shape.states);
  d.cost.resize(shape.states);
  for (int s = 0; s < shape.states; ++s) {
    for (int a = 0; a < shape.actions; ++a) {
      auto p = rng.simplex(shape.states);
      if (shape.sparse) {
        for (auto& v : p)
          if (rng.coin(0.4)) v = 0.0;
        p[rng.integer(0, shape.states - 1)] += 0.1;
        double total = 0.0;
        for (double v : p) total += v;
        for (auto& v : p) v /= total;
      }
      d.transition[s].push_back(std::move(p));
      AffineCost c;
      c.f.resize(shape.design_dim);
      for (auto& v : c.f) v = rng.uniform(-shape.f_abs, shape.f_abs);
      c.g = rng.uniform(shape.g_lo, shape.g_hi);
      d.cost[s].push_back(std::move(c));
    }
  }
  return ScenarioMdp(std::move(d));
}

inline std::vector<double> random_point(TestRng& rng, int n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

struct InstanceShape {
  int max_binaries = 6;
  int max_scenarios = 3;
  int max_states = 4;
  int max_actions = 3;
};

/// Binary designs with one or two knapsack rows and nonnegative operational
/// costs (g in [10, 40], |f| <= 1).
inline DesignMdpInstance random_binary_instance(TestRng& rng, const InstanceShape& shape = {}) {
  const int n = rng.integer(1, shape.max_binaries);
  const int K = rng.integer(1, shape.max_scenarios);
  DesignSpace::Data space;
  space.n2 = n;
  space.bounds.assign(n, {0.0, 1.0});
  space.integrality.assign(n, VarKind::Binary);
  const int rows = rng.integer(1, 2);
  for (int i = 0; i < rows; ++i) {
    LinearRow row;
    row.coeffs.resize(n);
    double total = 0.0;
    for (auto& c : row.coeffs) total += (c = rng.uniform(1.0, 10.0));
    row.rel = Relation::LessEqual;
    row.rhs = rng.uniform(0.3, 0.8) * total;
    space.constraints.push_back(std::move(row));
  }
  std::vector<double> cost(n);
  for (auto& c : cost) c = rng.uniform(0.0, 20.0);
  const auto q = rng.simplex(K, 0.2);
  std::vector<ScenarioMdp> scenarios;
  for (int k = 0; k < K; ++k) {
    MdpShape ms;
    ms.states = rng.integer(1, shape.max_states);
    ms.actions = rng.integer(1, shape.max_actions);
    ms.design_dim = n;
    ms.discount_lo = 0.8;
    ms.discount_hi = 0.97;
    ms.g_lo = 10.0;
    ms.g_hi = 40.0;
    ms.f_abs = 1.0;
    ms.probability = q[k];
    scenarios.push_back(random_mdp(rng, ms));
  }
  // Normalization above can leave the probabilities off by an ulp; fix the last one.
  double rest = 1.0;
  for (int k = 0; k + 1 < K; ++k) rest -= scenarios[k].probability();
  scenarios.back() = scenarios.back().with_probability(rest);
  return DesignMdpInstance(DesignSpace(std::move(space)), std::move(cost), std::move(scenarios));
}

/// Policy value by summing the discounted cost series for `horizon` steps.
inline std::vector<double> truncated_policy_value(const ScenarioMdp& mdp, const std::vector<double>& x,
                                                  const DecisionRule& rule, int horizon) {
  const int S = mdp.num_states();
  std::vector<double> h(S), v(S, 0.0);
  for (int s = 0; s < S; ++s) {
    const auto& c = mdp.cost(s, rule.action_of[s]);
    double val = c.g;
    for (std::size_t j = 0; j < x.size(); ++j) val += c.f[j] * x[j];
    h[s] = val;
  }
  // v_{t+1} = h + lambda P v_t, from v_0 = 0; after `horizon` steps this is the truncated sum.
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> next(S);
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int j = 0; j < S; ++j) acc += mdp.prob(s, rule.action_of[s], j) * v[j];
      next[s] = h[s] + mdp.discount() * acc;
    }
    v = std::move(next);
  }
  return v;
}

/// Optimal values by brute force over every deterministic stationary rule.
inline std::vector<double> exhaustive_optimal_value(const ScenarioMdp& mdp, const std::vector<double>& x) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  DecisionRule rule{std::vector<int>(S, 0)};
  std::vector<double> best(S, INFINITY);
  while (true) {
    const auto v = truncated_policy_value(mdp, x, rule, 3000);
    for (int s = 0; s < S; ++s) best[s] = std::min(best[s], v[s]);
    int s = 0;
    while (s < S && ++rule.action_of[s] == A) rule.action_of[s++] = 0;
    if (s == S) break;
  }
  return best;
}

/// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-10) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double factor = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= factor * a[c][k];
      b[r] -= factor * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

struct VertexOracleResult {
  bool feasible = false;
  double objective = 0.0;
};

/// Optimum of a small bounded LP by enumerating every basis of n active
/// constraints (rows and finite bounds). Requires a bounded feasible region.
inline VertexOracleResult vertex_enumeration(const LpModel& lp) {
  const std::size_t n = lp.num_vars();
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (const auto& r : lp.rows) {
    planes.push_back(r.coeffs);
    rhs.push_back(r.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (std::isfinite(lp.bounds[j].lower)) {
      planes.push_back(e);
      rhs.push_back(lp.bounds[j].lower);
    }
    if (std::isfinite(lp.bounds[j].upper)) {
      planes.push_back(e);
      rhs.push_back(lp.bounds[j].upper);
    }
  }
  VertexOracleResult best;
  const std::size_t P = planes.size();
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (P < n) return best;
  while (true) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (auto i : pick) {
      a.push_back(planes[i]);
      b.push_back(rhs[i]);
    }
    std::vector<double> x;
    if (solve_dense(a, b, x) && max_primal_violation(lp, x) <= 1e-9) {
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
      const bool better = lp.sense == Sense::Minimize ? obj < best.objective : obj > best.objective;
      if (!best.feasible || better) {
        best.feasible = true;
        best.objective = obj;
      }
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == P - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

/// Optimum of a MIP with binary integer columns, by enumerating every 0/1
/// assignment and solving the remaining LP (or just checking feasibility when
/// every column is binary).
inline VertexOracleResult exhaustive_binary_mip(const MipModel& mip) {
  const std::size_t n = mip.lp.num_vars();
  std::vector<std::size_t> bin;
  for (std::size_t j = 0; j < n; ++j)
    if (mip.integrality[j] != VarKind::Continuous) bin.push_back(j);
  VertexOracleResult best;
  const std::uint64_t total = std::uint64_t{1} << bin.size();
  std::vector<std::size_t> cont;
  for (std::size_t j = 0; j < n; ++j)
    if (mip.integrality[j] == VarKind::Continuous) cont.push_back(j);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<double> fixed(n, 0.0);
    bool in_bounds = true;
    for (std::size_t b = 0; b < bin.size(); ++b) {
      const double v = (mask >> b) & 1U;
      if (v < mip.lp.bounds[bin[b]].lower || v > mip.lp.bounds[bin[b]].upper) in_bounds = false;
      fixed[bin[b]] = v;
    }
    if (!in_bounds) continue;
    double obj = 0.0;
    for (auto j : bin) obj += mip.lp.objective[j] * fixed[j];
    if (cont.empty()) {
      if (max_primal_violation(mip.lp, fixed) > 1e-9) continue;
    } else {
      // LP over the continuous columns with the integer ones substituted.
      LpModel lp;
      lp.sense = mip.lp.sense;
      for (auto j : cont) lp.add_variable(mip.lp.objective[j], mip.lp.bounds[j]);
      for (const auto& row : mip.lp.rows) {
        LinearRow r;
        r.rel = row.rel;
        r.rhs = row.rhs;
        for (auto j : bin) r.rhs -= row.coeffs[j] * fixed[j];
        for (auto j : cont) r.coeffs.push_back(row.coeffs[j]);
        lp.rows.push_back(std::move(r));
      }
      const auto r = vertex_enumeration(lp);
      if (!r.feasible) continue;
      obj += r.objective;
    }
    const bool better = mip.lp.sense == Sense::Minimize ? obj < best.objective : obj > best.objective;
    if (!best.feasible || better) {
      best.feasible = true;
      best.objective = obj;
    }
  }
  return best;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// A fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mdpdesign_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
