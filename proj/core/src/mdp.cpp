#include "mdpdesign/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mdpdesign/errors.hpp"

namespace mdpdesign {

namespace {

constexpr double kProbabilityTol = 1e-9;

void check_dim(const ScenarioMdp& mdp, std::span<const double> x) {
  if (x.size() != mdp.design_dim())
    throw DimensionError("design vector has length " + std::to_string(x.size()) + ", MDP expects " +
                         std::to_string(mdp.design_dim()));
}

// Q(s, a) = cost(s, a) + lambda sum_s' p(s'|s,a) v_s'
double q_value(const ScenarioMdp& mdp, const std::vector<double>& costs, int s, int a,
               std::span<const double> v) {
  const auto row = mdp.transition_row(s, a);
  double expect = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) expect += row[j] * v[j];
  return costs[static_cast<std::size_t>(s) * mdp.num_actions() + a] + mdp.discount() * expect;
}

ValueFunction evaluate_rule(const ScenarioMdp& mdp, const std::vector<double>& costs, const DecisionRule& rule) {
  const int S = mdp.num_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
  Eigen::VectorXd h(S);
  for (int s = 0; s < S; ++s) {
    const int a = rule.action_of[s];
    const auto row = mdp.transition_row(s, a);
    for (int j = 0; j < S; ++j) system(s, j) -= mdp.discount() * row[j];
    h(s) = costs[static_cast<std::size_t>(s) * mdp.num_actions() + a];
  }
  const Eigen::VectorXd v = system.partialPivLu().solve(h);
  return ValueFunction{std::vector<double>(v.data(), v.data() + S)};
}

void check_rule(const ScenarioMdp& mdp, const DecisionRule& rule) {
  if (rule.action_of.size() != static_cast<std::size_t>(mdp.num_states()))
    throw DimensionError("decision rule length differs from the number of states");
  for (int a : rule.action_of)
    if (a < 0 || a >= mdp.num_actions()) throw DimensionError("decision rule holds an invalid action index");
}

}  // namespace

double evaluate_cost(const AffineCost& cost, std::span<const double> x) {
  if (cost.f.size() != x.size())
    throw DimensionError("cost sensitivity has length " + std::to_string(cost.f.size()) + ", design has " +
                         std::to_string(x.size()));
  double value = cost.g;
  for (std::size_t i = 0; i < x.size(); ++i) value += cost.f[i] * x[i];
  return value;
}

std::vector<std::string> ScenarioMdp::check(const Data& d) {
  std::vector<std::string> bad;
  if (d.num_states <= 0) bad.push_back("num_states must be positive");
  if (d.num_actions <= 0) bad.push_back("num_actions must be positive");
  if (!(d.discount > 0.0 && d.discount < 1.0)) bad.push_back("discount must lie in (0,1)");
  if (!(d.probability > 0.0 && d.probability <= 1.0)) bad.push_back("probability must lie in (0,1]");
  if (!bad.empty()) return bad;

  const auto S = static_cast<std::size_t>(d.num_states);
  const auto A = static_cast<std::size_t>(d.num_actions);
  if (d.transition.size() != S) {
    bad.push_back("transition has " + std::to_string(d.transition.size()) + " states, expected " +
                  std::to_string(S));
  } else {
    for (std::size_t s = 0; s < S; ++s) {
      if (d.transition[s].size() != A) {
        bad.push_back("transition[" + std::to_string(s) + "] has wrong action count");
        continue;
      }
      for (std::size_t a = 0; a < A; ++a) {
        const auto& row = d.transition[s][a];
        const std::string where = "transition[" + std::to_string(s) + "][" + std::to_string(a) + "]";
        if (row.size() != S) {
          bad.push_back(where + " has wrong length");
          continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (double p : row) {
          if (!(p >= 0.0)) negative = true;
          sum += p;
        }
        if (negative) bad.push_back(where + " has a negative or NaN entry");
        if (std::abs(sum - 1.0) > kProbabilityTol) bad.push_back(where + " sums to " + std::to_string(sum));
      }
    }
  }

  std::size_t dim = 0;
  bool dim_set = false;
  if (d.cost.size() != S) {
    bad.push_back("cost has wrong state count");
  } else {
    for (std::size_t s = 0; s < S; ++s) {
      if (d.cost[s].size() != A) {
        bad.push_back("cost[" + std::to_string(s) + "] has wrong action count");
        continue;
      }
      for (std::size_t a = 0; a < A; ++a) {
        const auto& c = d.cost[s][a];
        if (!dim_set) {
          dim = c.f.size();
          dim_set = true;
        } else if (c.f.size() != dim) {
          bad.push_back("cost[" + std::to_string(s) + "][" + std::to_string(a) + "].f has inconsistent length");
        }
        bool finite = std::isfinite(c.g);
        for (double v : c.f) finite = finite && std::isfinite(v);
        if (!finite) bad.push_back("cost[" + std::to_string(s) + "][" + std::to_string(a) + "] is not finite");
      }
    }
  }

  if (d.initial_dist.size() != S) {
    bad.push_back("initial_dist has wrong length");
  } else {
    double sum = 0.0;
    bool negative = false;
    for (double p : d.initial_dist) {
      if (!(p >= 0.0)) negative = true;
      sum += p;
    }
    if (negative) bad.push_back("initial_dist has a negative or NaN entry");
    if (std::abs(sum - 1.0) > kProbabilityTol) bad.push_back("initial_dist sums to " + std::to_string(sum));
  }
  return bad;
}

ScenarioMdp::ScenarioMdp(Data data) {
  if (auto bad = check(data); !bad.empty()) throw InvariantError(std::move(bad));
  num_states_ = data.num_states;
  num_actions_ = data.num_actions;
  discount_ = data.discount;
  probability_ = data.probability;
  design_dim_ = data.cost[0][0].f.size();
  const auto S = static_cast<std::size_t>(num_states_);
  const auto A = static_cast<std::size_t>(num_actions_);
  transition_.reserve(S * A * S);
  costs_.reserve(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      transition_.insert(transition_.end(), data.transition[s][a].begin(), data.transition[s][a].end());
      costs_.push_back(std::move(data.cost[s][a]));
    }
  }
  initial_dist_ = std::move(data.initial_dist);
}

ScenarioMdp::Data ScenarioMdp::to_data() const {
  Data d;
  d.num_states = num_states_;
  d.num_actions = num_actions_;
  d.discount = discount_;
  d.probability = probability_;
  d.initial_dist = initial_dist_;
  d.transition.resize(num_states_);
  d.cost.resize(num_states_);
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      const auto row = transition_row(s, a);
      d.transition[s].emplace_back(row.begin(), row.end());
      d.cost[s].push_back(cost(s, a));
    }
  }
  return d;
}

std::vector<double> ScenarioMdp::cost_table(std::span<const double> x) const {
  if (x.size() != design_dim_) throw DimensionError("design vector length differs from the MDP's design dimension");
  std::vector<double> table(costs_.size());
  for (std::size_t i = 0; i < costs_.size(); ++i) table[i] = evaluate_cost(costs_[i], x);
  return table;
}

ScenarioMdp ScenarioMdp::with_probability(double q) const {
  auto d = to_data();
  d.probability = q;
  return ScenarioMdp(std::move(d));
}

ScenarioMdp ScenarioMdp::with_cost_shift(double delta) const {
  auto d = to_data();
  for (auto& row : d.cost)
    for (auto& c : row) c.g += delta;
  return ScenarioMdp(std::move(d));
}

ValueFunction policy_value(const ScenarioMdp& mdp, std::span<const double> x, const DecisionRule& rule) {
  check_dim(mdp, x);
  check_rule(mdp, rule);
  return evaluate_rule(mdp, mdp.cost_table(x), rule);
}

DecisionRule greedy_rule(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> values) {
  check_dim(mdp, x);
  const auto costs = mdp.cost_table(x);
  DecisionRule rule{std::vector<int>(mdp.num_states(), 0)};
  for (int s = 0; s < mdp.num_states(); ++s) {
    double best = kInfinity;
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const double q = q_value(mdp, costs, s, a, values);
      if (q < best) {
        best = q;
        rule.action_of[s] = a;
      }
    }
  }
  return rule;
}

double bellman_residual(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> values) {
  check_dim(mdp, x);
  if (values.size() != static_cast<std::size_t>(mdp.num_states()))
    throw DimensionError("value vector length differs from the number of states");
  const auto costs = mdp.cost_table(x);
  double worst = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    double best = kInfinity;
    for (int a = 0; a < mdp.num_actions(); ++a) best = std::min(best, q_value(mdp, costs, s, a, values));
    worst = std::max(worst, std::abs(values[s] - best));
  }
  return worst;
}

MdpSolution value_iteration(const ScenarioMdp& mdp, std::span<const double> x, double eps) {
  check_dim(mdp, x);
  if (!(eps > 0.0)) throw std::invalid_argument("value_iteration: eps must be positive");
  const auto costs = mdp.cost_table(x);
  const int S = mdp.num_states();
  const double lambda = mdp.discount();
  const double stop = eps * (1.0 - lambda) / (2.0 * lambda);

  std::vector<double> v(S, 0.0), next(S, 0.0);
  MdpSolution out;
  while (true) {
    ++out.iterations;
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = kInfinity;
      for (int a = 0; a < mdp.num_actions(); ++a) best = std::min(best, q_value(mdp, costs, s, a, v));
      next[s] = best;
      diff = std::max(diff, std::abs(best - v[s]));
    }
    v.swap(next);
    if (diff < stop) break;
  }
  out.rule = greedy_rule(mdp, x, v);
  out.value.values = std::move(v);
  return out;
}

MdpSolution policy_iteration(const ScenarioMdp& mdp, std::span<const double> x) {
  check_dim(mdp, x);
  const auto costs = mdp.cost_table(x);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();

  // Start from the myopic rule.
  DecisionRule rule{std::vector<int>(S, 0)};
  for (int s = 0; s < S; ++s)
    for (int a = 1; a < A; ++a)
      if (costs[s * A + a] < costs[s * A + rule.action_of[s]]) rule.action_of[s] = a;

  MdpSolution out;
  ValueFunction value = evaluate_rule(mdp, costs, rule);
  while (true) {
    ++out.iterations;
    bool changed = false;
    for (int s = 0; s < S; ++s) {
      const int current = rule.action_of[s];
      const double q_current = q_value(mdp, costs, s, current, value.values);
      int best_a = current;
      double best_q = q_current;
      for (int a = 0; a < A; ++a) {
        const double q = q_value(mdp, costs, s, a, value.values);
        if (q < best_q || (q == best_q && a < best_a)) {
          best_q = q;
          best_a = a;
        }
      }
      const double threshold = 1e-12 * std::max(1.0, std::abs(q_current));
      if (best_a != current && best_q < q_current - threshold) {
        rule.action_of[s] = best_a;
        changed = true;
      }
    }
    if (!changed) break;
    value = evaluate_rule(mdp, costs, rule);
  }
  out.value = std::move(value);
  out.rule = std::move(rule);
  return out;
}

double expected_initial_value(const ScenarioMdp& mdp, const ValueFunction& value) {
  if (value.values.size() != static_cast<std::size_t>(mdp.num_states()))
    throw DimensionError("value vector length differs from the number of states");
  double u = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) u += mdp.initial_dist()[s] * value.values[s];
  return u;
}

LpModel build_primal_lp(const ScenarioMdp& mdp, std::span<const double> x) {
  check_dim(mdp, x);
  const auto costs = mdp.cost_table(x);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  LpModel lp;
  lp.sense = Sense::Maximize;
  for (int s = 0; s < S; ++s) lp.add_variable(1.0, {-kInfinity, kInfinity}, "v" + std::to_string(s));
  lp.rows.reserve(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      LinearRow row;
      row.coeffs.assign(S, 0.0);
      const auto p = mdp.transition_row(s, a);
      for (int j = 0; j < S; ++j) row.coeffs[j] = -mdp.discount() * p[j];
      row.coeffs[s] += 1.0;
      row.rel = Relation::LessEqual;
      row.rhs = costs[s * A + a];
      row.name = "bellman_" + std::to_string(s) + "_" + std::to_string(a);
      lp.rows.push_back(std::move(row));
    }
  }
  return lp;
}

LpModel build_dual_lp(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> state_weights) {
  check_dim(mdp, x);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  if (state_weights.size() != static_cast<std::size_t>(S))
    throw DimensionError("state weight vector length differs from the number of states");
  for (double w : state_weights)
    if (!(w > 0.0)) throw std::invalid_argument("build_dual_lp: state weights must be strictly positive");
  const auto costs = mdp.cost_table(x);
  LpModel lp;
  lp.sense = Sense::Minimize;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      lp.add_variable(costs[s * A + a], {0.0, kInfinity}, "gamma_" + std::to_string(s) + "_" + std::to_string(a));
  for (int s = 0; s < S; ++s) {
    LinearRow row;
    row.coeffs.assign(static_cast<std::size_t>(S) * A, 0.0);
    for (int a = 0; a < A; ++a) row.coeffs[s * A + a] += 1.0;
    for (int from = 0; from < S; ++from)
      for (int a = 0; a < A; ++a) row.coeffs[from * A + a] -= mdp.discount() * mdp.prob(from, a, s);
    row.rel = Relation::Equal;
    row.rhs = state_weights[s];
    row.name = "balance_" + std::to_string(s);
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

}  // namespace mdpdesign
