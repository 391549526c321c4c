#include "mdpdesign/reformulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <optional>

#include "mdpdesign/errors.hpp"

namespace mdpdesign {

const char* to_string(BigMKind kind) { return kind == BigMKind::Uniform ? "uniform" : "per-state-lp"; }

namespace {

// max (or min) of f.x + g over the design box.
double box_extreme_cost(const DesignSpace& space, const AffineCost& cost, bool maximize) {
  double total = cost.g;
  for (std::size_t j = 0; j < cost.f.size(); ++j) {
    const double f = cost.f[j];
    if (f == 0.0) continue;
    const bool upper = (f > 0.0) == maximize;
    const double bound = upper ? space.bounds()[j].upper : space.bounds()[j].lower;
    if (!std::isfinite(bound))
      throw UnboundedDesignError(j, "design variable " + std::to_string(j) +
                                        " is unbounded but carries a nonzero cost coefficient; big-M is unbounded");
    total += f * bound;
  }
  return total;
}

LpModel design_relaxation(const DesignSpace& space) {
  LpModel lp;
  lp.sense = Sense::Maximize;
  lp.objective.assign(space.size(), 0.0);
  lp.bounds = space.bounds();
  lp.rows = space.constraints();
  return lp;
}

// States reachable from s (s included) under any action.
std::vector<std::vector<char>> reachability(const ScenarioMdp& mdp) {
  const int S = mdp.num_states();
  std::vector<std::vector<char>> reach(S, std::vector<char>(S, 0));
  for (int start = 0; start < S; ++start) {
    auto& seen = reach[start];
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const auto row = mdp.transition_row(s, a);
        for (int j = 0; j < S; ++j) {
          if (row[j] > 0.0 && !seen[j]) {
            seen[j] = 1;
            queue.push_back(j);
          }
        }
      }
    }
  }
  return reach;
}

}  // namespace

BigMScheme compute_big_m(const DesignMdpInstance& instance, BigMKind kind) {
  const auto& space = instance.design();
  BigMScheme scheme;
  scheme.kind = kind;
  std::optional<LpModel> relaxation;
  if (kind == BigMKind::PerStateLp) relaxation = design_relaxation(space);

  for (const auto& mdp : instance.scenarios()) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double horizon = 1.0 / (1.0 - mdp.discount());

    std::vector<double> pair_max(static_cast<std::size_t>(S) * A);
    double t = -kInfinity;
    double low = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double v = box_extreme_cost(space, mdp.cost(s, a), true);
        pair_max[s * A + a] = v;
        t = std::max(t, v);
        low = std::min(low, box_extreme_cost(space, mdp.cost(s, a), false));
      }
    }
    // A Bellman slack is at most (max cost - min cost) / (1 - lambda); with
    // nonnegative costs this is t / (1 - lambda).
    const BigMPair uniform{horizon, std::max(t - low, 1.0) * horizon};

    if (kind == BigMKind::Uniform) {
      scheme.values.emplace_back(S, uniform);
      continue;
    }

    // Tighten each pair's maximum over the LP relaxation of the leader
    // polyhedron; an infeasible relaxation keeps the box value.
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const auto& cost = mdp.cost(s, a);
        if (std::all_of(cost.f.begin(), cost.f.end(), [](double f) { return f == 0.0; })) continue;
        relaxation->objective = cost.f;
        const auto r = solve_lp(*relaxation);
        if (r.optimal()) pair_max[s * A + a] = std::min(pair_max[s * A + a], r.objective + cost.g);
      }
    }
    const auto reach = reachability(mdp);
    std::vector<BigMPair> per_state(S);
    for (int s = 0; s < S; ++s) {
      double ts = -kInfinity;
      for (int j = 0; j < S; ++j)
        if (reach[s][j])
          for (int a = 0; a < A; ++a) ts = std::max(ts, pair_max[j * A + a]);
      per_state[s] = {horizon, std::min(std::max(ts - low, 1.0) * horizon, uniform.m_prime)};
    }
    scheme.values.push_back(std::move(per_state));
  }
  return scheme;
}

ReformulatedMip build_single_level_mip(const DesignMdpInstance& instance, const BigMScheme& scheme) {
  const auto& space = instance.design();
  const auto& scenarios = instance.scenarios();
  const std::size_t K = scenarios.size();
  if (scheme.values.size() != K) throw DimensionError("big-M scheme does not cover every scenario");
  for (std::size_t k = 0; k < K; ++k)
    if (scheme.values[k].size() != static_cast<std::size_t>(scenarios[k].num_states()))
      throw DimensionError("big-M scheme does not cover every state of scenario " + std::to_string(k));

  ReformulatedMip out;
  auto& map = out.index_map;
  auto& lp = out.model.lp;
  auto& kinds = out.model.integrality;
  lp.sense = Sense::Minimize;

  map.n = space.size();
  for (std::size_t j = 0; j < map.n; ++j) {
    lp.add_variable(instance.design_cost()[j], space.bounds()[j], "x" + std::to_string(j));
    kinds.push_back(space.integrality()[j]);
  }
  for (std::size_t k = 0; k < K; ++k) {
    const auto& mdp = scenarios[k];
    map.num_states.push_back(mdp.num_states());
    map.num_actions.push_back(mdp.num_actions());
    map.v_offset.push_back(lp.num_vars());
    for (int s = 0; s < mdp.num_states(); ++s) {
      lp.add_variable(mdp.probability() * mdp.initial_dist()[s], {-kInfinity, kInfinity},
                      "v_" + std::to_string(k) + "_" + std::to_string(s));
      kinds.push_back(VarKind::Continuous);
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const auto& mdp = scenarios[k];
    map.gamma_offset.push_back(lp.num_vars());
    for (int s = 0; s < mdp.num_states(); ++s)
      for (int a = 0; a < mdp.num_actions(); ++a) {
        lp.add_variable(0.0, {0.0, kInfinity},
                        "gamma_" + std::to_string(k) + "_" + std::to_string(s) + "_" + std::to_string(a));
        kinds.push_back(VarKind::Continuous);
      }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const auto& mdp = scenarios[k];
    map.delta_offset.push_back(lp.num_vars());
    for (int s = 0; s < mdp.num_states(); ++s)
      for (int a = 0; a < mdp.num_actions(); ++a) {
        lp.add_variable(0.0, {0.0, 1.0},
                        "delta_" + std::to_string(k) + "_" + std::to_string(s) + "_" + std::to_string(a));
        kinds.push_back(VarKind::Binary);
      }
  }
  map.num_columns = lp.num_vars();

  const std::size_t ncols = map.num_columns;
  auto new_row = [&](Relation rel, double rhs, std::string name) -> LinearRow& {
    LinearRow row;
    row.coeffs.assign(ncols, 0.0);
    row.rel = rel;
    row.rhs = rhs;
    row.name = std::move(name);
    lp.rows.push_back(std::move(row));
    return lp.rows.back();
  };

  for (std::size_t i = 0; i < space.constraints().size(); ++i) {
    const auto& c = space.constraints()[i];
    auto& row = new_row(c.rel, c.rhs, "leader_" + std::to_string(i));
    std::copy(c.coeffs.begin(), c.coeffs.end(), row.coeffs.begin());
  }
  map.leader_rows = lp.rows.size();

  for (std::size_t k = 0; k < K; ++k) {
    const auto& mdp = scenarios[k];
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double lambda = mdp.discount();
    const std::string tag = std::to_string(k);

    map.bellman_row.push_back(lp.rows.size());
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto& cost = mdp.cost(s, a);
        auto& row = new_row(Relation::LessEqual, cost.g,
                            "bellman_" + tag + "_" + std::to_string(s) + "_" + std::to_string(a));
        const auto p = mdp.transition_row(s, a);
        for (int j = 0; j < S; ++j) row.coeffs[map.v(k, j)] -= lambda * p[j];
        row.coeffs[map.v(k, s)] += 1.0;
        for (std::size_t i = 0; i < map.n; ++i) row.coeffs[i] -= cost.f[i];
      }

    map.balance_row.push_back(lp.rows.size());
    for (int s = 0; s < S; ++s) {
      auto& row = new_row(Relation::Equal, mdp.probability() * mdp.initial_dist()[s],
                          "balance_" + tag + "_" + std::to_string(s));
      for (int a = 0; a < A; ++a) row.coeffs[map.gamma(k, s, a)] += 1.0;
      for (int j = 0; j < S; ++j)
        for (int a = 0; a < A; ++a) row.coeffs[map.gamma(k, j, a)] -= lambda * mdp.prob(j, a, s);
    }

    map.activation_row.push_back(lp.rows.size());
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        auto& row = new_row(Relation::LessEqual, 0.0,
                            "activate_" + tag + "_" + std::to_string(s) + "_" + std::to_string(a));
        row.coeffs[map.gamma(k, s, a)] = 1.0;
        row.coeffs[map.delta(k, s, a)] = -scheme.at(k, s).m;
      }

    map.slack_row.push_back(lp.rows.size());
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto& cost = mdp.cost(s, a);
        const double m_prime = scheme.at(k, s).m_prime;
        auto& row = new_row(Relation::LessEqual, m_prime - cost.g,
                            "slack_" + tag + "_" + std::to_string(s) + "_" + std::to_string(a));
        for (std::size_t i = 0; i < map.n; ++i) row.coeffs[i] += cost.f[i];
        const auto p = mdp.transition_row(s, a);
        for (int j = 0; j < S; ++j) row.coeffs[map.v(k, j)] += lambda * p[j];
        row.coeffs[map.v(k, s)] -= 1.0;
        row.coeffs[map.delta(k, s, a)] = m_prime;
      }
  }
  return out;
}

IntegratedSolution solve_integrated(const DesignMdpInstance& instance, BigMKind kind, const SolverConfig& config,
                                    ReformulationRun* run) {
  const auto start = std::chrono::steady_clock::now();
  ReformulationRun local;
  ReformulationRun& r = run ? *run : local;

  r.scheme = compute_big_m(instance, kind);
  if (!(config.bigm_scale > 0.0)) throw InvariantError({"bigm_scale must be positive"});
  if (config.bigm_scale != 1.0)
    for (auto& per_state : r.scheme.values)
      for (auto& pair : per_state) {
        pair.m *= config.bigm_scale;
        pair.m_prime *= config.bigm_scale;
      }
  r.mip = build_single_level_mip(instance, r.scheme);
  const MipBackend& backend = config.backend ? *config.backend : internal_backend();
  r.result = backend.solve(r.mip.model, config.options);

  IntegratedSolution sol;
  sol.method = SolveMethod::MipReformulation;
  sol.status = r.result.status;
  sol.stats.nodes = r.result.stats.nodes;
  sol.stats.lp_iterations = r.result.stats.iterations;

  const bool has_point = !r.result.primal.empty();
  if (has_point) {
    const auto& space = instance.design();
    sol.x.assign(r.result.primal.begin(), r.result.primal.begin() + static_cast<std::ptrdiff_t>(space.size()));
    for (std::size_t j = 0; j < sol.x.size(); ++j)
      if (space.integrality()[j] != VarKind::Continuous) sol.x[j] = std::round(sol.x[j]);
    sol.stats.mip_objective = r.result.objective;

    auto breakdown = evaluate_design(instance, sol.x);
    sol.objective = breakdown.objective;
    sol.per_scenario = std::move(breakdown.per_scenario);
    sol.stats.designs_evaluated = 1;

    const double scale = std::max(1.0, std::abs(sol.objective));
    if (sol.status == SolveStatus::Optimal && std::abs(r.result.objective - sol.objective) > config.validity_tol * scale)
      throw BigMValidityError(r.result.objective, sol.objective);
  } else if (sol.status == SolveStatus::Infeasible) {
    // With valid big-Ms every feasible design extends to a feasible MIP point.
    const auto& space = instance.design();
    MipModel leader;
    leader.lp.objective = instance.design_cost();
    leader.lp.bounds = space.bounds();
    leader.lp.rows = space.constraints();
    leader.integrality = space.integrality();
    const auto design = backend.solve(leader, config.options);
    if (design.optimal()) throw BigMValidityError(kInfinity, evaluate_design(instance, design.primal).objective);
  }
  sol.stats.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

DecisionRule extract_policy_from_duals(const SolveResult& result, const IndexMap& map, std::size_t k,
                                       const DecisionRule& fallback) {
  if (k >= map.num_states.size()) throw DimensionError("scenario index out of range");
  const int S = map.num_states[k];
  const int A = map.num_actions[k];
  if (result.primal.size() != map.num_columns) throw DimensionError("MIP result does not match the index map");
  if (fallback.action_of.size() != static_cast<std::size_t>(S))
    throw DimensionError("fallback rule length differs from the number of states");
  DecisionRule rule{std::vector<int>(S, 0)};
  for (int s = 0; s < S; ++s) {
    int best = -1;
    double best_gamma = 1e-12;
    for (int a = 0; a < A; ++a) {
      const double g = result.primal[map.gamma(k, s, a)];
      if (g > best_gamma) {
        best_gamma = g;
        best = a;
      }
    }
    rule.action_of[s] = best >= 0 ? best : fallback.action_of[s];
  }
  return rule;
}

double max_scaled_complementarity(const DesignMdpInstance& instance, const ReformulatedMip& mip,
                                  const BigMScheme& scheme, std::span<const double> primal) {
  const auto& map = mip.index_map;
  const std::span<const double> x = primal.subspan(0, map.n);
  double worst = 0.0;
  for (std::size_t k = 0; k < instance.scenarios().size(); ++k) {
    const auto& mdp = instance.scenarios()[k];
    for (int s = 0; s < mdp.num_states(); ++s) {
      const auto& big = scheme.at(k, s);
      for (int a = 0; a < mdp.num_actions(); ++a) {
        double slack = evaluate_cost(mdp.cost(s, a), x) - primal[map.v(k, s)];
        const auto p = mdp.transition_row(s, a);
        for (int j = 0; j < mdp.num_states(); ++j) slack += mdp.discount() * p[j] * primal[map.v(k, j)];
        const double product = primal[map.gamma(k, s, a)] * std::abs(slack);
        worst = std::max(worst, product / (big.m * big.m_prime));
      }
    }
  }
  return worst;
}

double max_occupancy_error(const DesignMdpInstance& instance, const IndexMap& map, std::span<const double> primal) {
  double worst = 0.0;
  for (std::size_t k = 0; k < instance.scenarios().size(); ++k) {
    const auto& mdp = instance.scenarios()[k];
    double total = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s)
      for (int a = 0; a < mdp.num_actions(); ++a) total += primal[map.gamma(k, s, a)];
    worst = std::max(worst, std::abs(total - mdp.probability() / (1.0 - mdp.discount())));
  }
  return worst;
}

BilevelModels build_bilevel_models(const DesignMdpInstance& instance) {
  const auto& space = instance.design();
  const std::size_t n = space.size();
  BilevelModels out;
  auto& leader = out.leader;
  leader.lp.sense = Sense::Minimize;
  for (std::size_t j = 0; j < n; ++j) {
    out.linking_variables.push_back("x" + std::to_string(j));
    leader.lp.add_variable(instance.design_cost()[j], space.bounds()[j], out.linking_variables.back());
    leader.integrality.push_back(space.integrality()[j]);
  }
  for (std::size_t k = 0; k < instance.scenarios().size(); ++k) {
    const auto& mdp = instance.scenarios()[k];
    auto& names = out.follower_variables.emplace_back();
    for (int s = 0; s < mdp.num_states(); ++s) {
      names.push_back("v_" + std::to_string(k) + "_" + std::to_string(s));
      leader.lp.add_variable(mdp.probability() * mdp.initial_dist()[s], {-kInfinity, kInfinity}, names.back());
      leader.integrality.push_back(VarKind::Continuous);
    }
  }
  for (const auto& row : space.constraints()) {
    LinearRow r = row;
    r.coeffs.resize(leader.lp.num_vars(), 0.0);
    leader.lp.rows.push_back(std::move(r));
  }

  for (std::size_t k = 0; k < instance.scenarios().size(); ++k) {
    const auto& mdp = instance.scenarios()[k];
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    MipModel f;
    f.lp.sense = Sense::Maximize;
    for (std::size_t j = 0; j < n; ++j) {
      f.lp.add_variable(0.0, space.bounds()[j], out.linking_variables[j]);
      f.integrality.push_back(space.integrality()[j]);
    }
    for (int s = 0; s < S; ++s) {
      f.lp.add_variable(1.0, {-kInfinity, kInfinity}, out.follower_variables[k][s]);
      f.integrality.push_back(VarKind::Continuous);
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        LinearRow row;
        row.coeffs.assign(n + S, 0.0);
        const auto& cost = mdp.cost(s, a);
        for (std::size_t j = 0; j < n; ++j) row.coeffs[j] = -cost.f[j];
        const auto p = mdp.transition_row(s, a);
        for (int t = 0; t < S; ++t) row.coeffs[n + t] = -mdp.discount() * p[t];
        row.coeffs[n + s] += 1.0;
        row.rel = Relation::LessEqual;
        row.rhs = cost.g;
        row.name = "bellman_" + std::to_string(s) + "_" + std::to_string(a);
        f.lp.rows.push_back(std::move(row));
      }
    }
    out.followers.push_back(std::move(f));
  }
  return out;
}

}  // namespace mdpdesign
