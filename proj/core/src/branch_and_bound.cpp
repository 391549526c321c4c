#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>

#include "mdpdesign/errors.hpp"
#include "mdpdesign/linear_solver.hpp"

namespace mdpdesign {

namespace {

struct BoundChange {
  std::size_t var;
  double lower;
  double upper;
};

struct Node {
  double bound;  // lower bound on the (internally minimized) objective
  std::int64_t id;
  std::vector<BoundChange> changes;  // relative to the root bounds
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

bool is_integer_kind(VarKind k) { return k != VarKind::Continuous; }

}  // namespace

const MipBackend& internal_backend() {
  static const InternalMipBackend backend;
  return backend;
}

SolveResult solve_mip(const MipModel& model, const MipOptions& options) {
  model.validate();
  const std::size_t n = model.lp.num_vars();
  const double sense_sign = model.lp.sense == Sense::Minimize ? 1.0 : -1.0;

  std::vector<VarBounds> root = model.lp.bounds;
  std::vector<std::size_t> int_vars;
  {
    std::vector<std::string> bad;
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_integer_kind(model.integrality[j])) continue;
      if (!std::isfinite(root[j].lower) || !std::isfinite(root[j].upper))
        bad.push_back("integer variable " + std::to_string(j) + " is unbounded");
      root[j].lower = std::ceil(root[j].lower - options.integrality_tol);
      root[j].upper = std::floor(root[j].upper + options.integrality_tol);
      int_vars.push_back(j);
    }
    if (!bad.empty()) throw InvariantError(std::move(bad));
  }

  SolveResult result;
  LpModel work = model.lp;
  std::optional<std::vector<double>> incumbent;
  double incumbent_value = kInfinity;
  bool unresolved = false;

  auto cutoff = [&] {
    if (!incumbent) return kInfinity;
    return incumbent_value - options.relative_gap * std::max(1.0, std::abs(incumbent_value));
  };
  auto apply = [&](const std::vector<BoundChange>& changes) {
    work.bounds = root;
    for (const auto& c : changes) work.bounds[c.var] = {c.lower, c.upper};
  };
  auto run_lp = [&](const LpModel& lp) {
    auto r = solve_lp(lp, options.lp);
    result.stats.iterations += r.stats.iterations;
    result.stats.lp_solves += 1;
    return r;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push(Node{-kInfinity, next_id++, {}});
  bool hit_node_limit = false;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound >= cutoff()) break;  // best-first: every remaining node is dominated
    if (result.stats.nodes >= options.node_limit) {
      hit_node_limit = true;
      break;
    }
    ++result.stats.nodes;

    apply(node.changes);
    const auto lp = run_lp(work);
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      result.status = SolveStatus::Unbounded;
      return result;
    }
    if (lp.status != SolveStatus::Optimal) {
      unresolved = true;
      continue;
    }
    const double value = sense_sign * lp.objective;
    if (value >= cutoff()) continue;

    std::size_t branch_var = n;
    double best_frac = options.integrality_tol;
    for (std::size_t j : int_vars) {
      const double v = lp.primal[j];
      const double frac = std::abs(v - std::round(v));
      if (frac > best_frac) {
        best_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var == n) {
      // Integral within tolerance: polish with the integer columns fixed.
      LpModel fixed = work;
      for (std::size_t j : int_vars) {
        const double r = std::clamp(std::round(lp.primal[j]), work.bounds[j].lower, work.bounds[j].upper);
        fixed.bounds[j] = {r, r};
      }
      auto polished = run_lp(fixed);
      std::vector<double> candidate;
      double candidate_value;
      if (polished.optimal()) {
        candidate = std::move(polished.primal);
        for (std::size_t j : int_vars) candidate[j] = fixed.bounds[j].lower;
        candidate_value = sense_sign * polished.objective;
      } else {
        // The rounded point only counts if it is feasible as it stands.
        candidate = lp.primal;
        for (std::size_t j : int_vars) candidate[j] = std::round(candidate[j]);
        if (max_primal_violation(work, candidate) > 1e-6) continue;
        candidate_value = value;
      }
      if (!incumbent || candidate_value < incumbent_value) {
        incumbent = std::move(candidate);
        incumbent_value = candidate_value;
      }
      continue;
    }

    const double v = lp.primal[branch_var];
    const auto& cur = work.bounds[branch_var];
    Node down{value, next_id++, node.changes};
    down.changes.push_back({branch_var, cur.lower, std::floor(v)});
    Node up{value, next_id++, std::move(node.changes)};
    up.changes.push_back({branch_var, std::ceil(v), cur.upper});
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (incumbent) {
    result.primal = std::move(*incumbent);
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += model.lp.objective[j] * result.primal[j];
    result.objective = obj;
    result.status = (hit_node_limit || unresolved) ? (hit_node_limit ? SolveStatus::NodeLimit
                                                                     : SolveStatus::IterationLimit)
                                                   : SolveStatus::Optimal;
  } else if (hit_node_limit) {
    result.status = SolveStatus::NodeLimit;
  } else if (unresolved) {
    result.status = SolveStatus::IterationLimit;
  } else {
    result.status = SolveStatus::Infeasible;
  }
  return result;
}

}  // namespace mdpdesign
