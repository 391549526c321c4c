#pragma once

// Scenario MDPs: finite, discounted, cost-minimizing, with immediate costs
// that are affine in the design vector x.

#include <span>
#include <string>
#include <vector>

#include "mdpdesign/linear_solver.hpp"

namespace mdpdesign {

/// Immediate cost f.x + g of one state-action pair.
struct AffineCost {
  std::vector<double> f;
  double g = 0.0;

  bool operator==(const AffineCost&) const = default;
};

/// Returns f.x + g. Throws DimensionError if the lengths differ.
double evaluate_cost(const AffineCost& cost, std::span<const double> x);

/// Cost assigned to state-action pairs that a model wants to forbid while
/// keeping every action available in every state.
inline constexpr double kProhibitiveCost = 1e6;

/// One scenario's operational MDP. Every action is available in every state.
/// Immutable once constructed; the constructor checks every invariant and
/// throws InvariantError listing all violations.
class ScenarioMdp {
 public:
  struct Data {
    int num_states = 0;
    int num_actions = 0;
    double discount = 0.0;
    // transition[s][a][s'] = p(s' | s, a)
    std::vector<std::vector<std::vector<double>>> transition;
    // cost[s][a]
    std::vector<std::vector<AffineCost>> cost;
    std::vector<double> initial_dist;
    double probability = 1.0;
  };

  explicit ScenarioMdp(Data data);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double discount() const { return discount_; }
  double probability() const { return probability_; }
  /// Length of every f vector (the design dimension this MDP was built for).
  std::size_t design_dim() const { return design_dim_; }

  double prob(int s, int a, int next) const { return transition_[row_index(s, a) * num_states_ + next]; }
  /// p(. | s, a) as a contiguous row.
  std::span<const double> transition_row(int s, int a) const {
    return {transition_.data() + row_index(s, a) * num_states_, static_cast<std::size_t>(num_states_)};
  }
  const AffineCost& cost(int s, int a) const { return costs_[row_index(s, a)]; }
  const std::vector<double>& initial_dist() const { return initial_dist_; }

  /// Evaluated costs at x, indexed s * num_actions + a.
  std::vector<double> cost_table(std::span<const double> x) const;

  /// Returns a copy with a new scenario probability (everything else equal).
  ScenarioMdp with_probability(double q) const;
  /// Returns a copy with delta added to every constant cost term g.
  ScenarioMdp with_cost_shift(double delta) const;

  Data to_data() const;

  bool operator==(const ScenarioMdp&) const = default;

  /// All invariant violations of `data` (empty when valid).
  static std::vector<std::string> check(const Data& data);

 private:
  std::size_t row_index(int s, int a) const { return static_cast<std::size_t>(s) * num_actions_ + a; }

  int num_states_;
  int num_actions_;
  double discount_;
  double probability_;
  std::size_t design_dim_;
  std::vector<double> transition_;  // flat [(s * A + a) * S + s']
  std::vector<AffineCost> costs_;   // flat [s * A + a]
  std::vector<double> initial_dist_;
};

struct DecisionRule {
  std::vector<int> action_of;

  bool operator==(const DecisionRule&) const = default;
};

struct ValueFunction {
  std::vector<double> values;
};

struct MdpSolution {
  ValueFunction value;
  DecisionRule rule;
  int iterations = 0;
};

/// Solves (I - lambda P_d) v = h_d(x) by LU with partial pivoting.
ValueFunction policy_value(const ScenarioMdp& mdp, std::span<const double> x, const DecisionRule& rule);

/// Value iteration from v = 0, stopping once successive iterates differ by
/// less than eps (1 - lambda) / (2 lambda) in sup-norm. The result is within
/// eps of the optimal value; the rule is greedy for the returned values.
MdpSolution value_iteration(const ScenarioMdp& mdp, std::span<const double> x, double eps);

/// Howard policy iteration. An action replaces the incumbent only on a strict
/// improvement (threshold 1e-12, scaled by the magnitude of the values);
/// ties go to the lowest action index.
MdpSolution policy_iteration(const ScenarioMdp& mdp, std::span<const double> x);

/// Greedy rule for `values` with lowest-index tie-breaking.
DecisionRule greedy_rule(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> values);

/// max_s | v_s - min_a (cost(s,a) + lambda sum p v) |
double bellman_residual(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> values);

/// alpha . v
double expected_initial_value(const ScenarioMdp& mdp, const ValueFunction& value);

/// max 1.v  s.t.  v_s - lambda sum_s' p(s'|s,a) v_s' <= f.x + g   for all (s, a).
/// Variables v_s are free; rows are ordered s-major (row s * A + a).
LpModel build_primal_lp(const ScenarioMdp& mdp, std::span<const double> x);

/// min sum gamma_{s,a} (f.x + g)
/// s.t. sum_a [gamma_{s,a} - lambda sum_{s'} gamma_{s',a} p(s|s',a)] = w_s.
/// Variables gamma_{s,a} >= 0 at column s * A + a.
LpModel build_dual_lp(const ScenarioMdp& mdp, std::span<const double> x, std::span<const double> state_weights);

}  // namespace mdpdesign
