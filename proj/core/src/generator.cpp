#include "mdpdesign/generator.hpp"

#include <algorithm>
#include <cmath>

#include "mdpdesign/errors.hpp"
#include "mdpdesign/rng.hpp"

namespace mdpdesign {

namespace {

using C = GenConstants;

std::vector<double> relative_probabilities(CounterRng& rng, int count, double stddev) {
  std::vector<double> p(count);
  double total = 0.0;
  for (auto& v : p) {
    v = std::max(rng.normal(C::kRelProbMean, stddev), C::kRelProbFloor);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

void GenParams::validate() const {
  std::vector<std::string> bad;
  if (n <= 0) bad.push_back("n must be positive");
  if (n % 2 != 0) bad.push_back("n must be even (split evenly between binary and integer variables)");
  if (m <= 0) bad.push_back("m must be positive");
  if (num_scenarios <= 0) bad.push_back("number of scenarios must be positive");
  if (num_states <= 0) bad.push_back("number of states must be positive");
  if (num_actions <= 0) bad.push_back("number of actions must be positive");
  if (!bad.empty()) throw InvariantError(std::move(bad));
}

double leader_rhs_mean(int n) { return static_cast<double>(n) / (C::kCoeffMean + 2.0 * C::kCoeffStd); }

DesignMdpInstance generate_instance(const GenParams& params) {
  params.validate();
  const auto seed = params.seed;
  const int n = params.n;

  DesignSpace::Data space;
  space.n1 = 0;
  space.n2 = static_cast<std::size_t>(n);
  for (int j = 0; j < n; ++j) {
    if (j < n / 2) {
      space.bounds.push_back({0.0, 1.0});
      space.integrality.push_back(VarKind::Binary);
    } else {
      auto rng = CounterRng::stream(seed, StreamTag::VariableBounds, j);
      const double ub = std::max(1.0, std::round(rng.normal(C::kUpperBoundMean, C::kUpperBoundStd)));
      space.bounds.push_back({0.0, ub});
      space.integrality.push_back(VarKind::Integer);
    }
  }
  const double b_mean = leader_rhs_mean(n);
  for (int i = 0; i < params.m; ++i) {
    auto coeff_rng = CounterRng::stream(seed, StreamTag::LeaderCoefficients, i);
    auto rhs_rng = CounterRng::stream(seed, StreamTag::LeaderRhs, i);
    LinearRow row;
    row.coeffs.resize(n);
    for (auto& c : row.coeffs) c = coeff_rng.normal(C::kCoeffMean, C::kCoeffStd);
    row.rel = Relation::LessEqual;
    row.rhs = rhs_rng.normal(b_mean, b_mean / 6.0);
    space.constraints.push_back(std::move(row));
  }

  std::vector<double> design_cost(n);
  {
    auto rng = CounterRng::stream(seed, StreamTag::DesignCost);
    for (auto& c : design_cost) c = rng.uniform(C::kDesignCostLo, C::kDesignCostHi);
  }

  std::vector<double> q;
  {
    auto rng = CounterRng::stream(seed, StreamTag::ScenarioProbability);
    q = relative_probabilities(rng, params.num_scenarios, C::kScenarioProbStd);
  }

  const int S = params.num_states;
  const int A = params.num_actions;
  std::vector<ScenarioMdp> scenarios;
  scenarios.reserve(params.num_scenarios);
  for (int k = 0; k < params.num_scenarios; ++k) {
    ScenarioMdp::Data d;
    d.num_states = S;
    d.num_actions = A;
    d.probability = q[k];
    {
      auto rng = CounterRng::stream(seed, StreamTag::Discount, k);
      d.discount = rng.uniform(C::kDiscountLo, C::kDiscountHi);
    }
    {
      auto rng = CounterRng::stream(seed, StreamTag::InitialDistribution, k);
      d.initial_dist = relative_probabilities(rng, S, C::kInitialProbStd);
    }
    d.transition.resize(S);
    d.cost.resize(S);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        auto trng = CounterRng::stream(seed, StreamTag::Transition, k, s, a);
        d.transition[s].push_back(relative_probabilities(trng, S, C::kTransitionProbStd));
        auto frng = CounterRng::stream(seed, StreamTag::CostSensitivity, k, s, a);
        auto grng = CounterRng::stream(seed, StreamTag::CostConstant, k, s, a);
        AffineCost cost;
        cost.f.resize(n);
        for (auto& f : cost.f) f = frng.uniform(C::kSensitivityLo, C::kSensitivityHi);
        cost.g = grng.uniform(C::kConstantLo, C::kConstantHi);
        d.cost[s].push_back(std::move(cost));
      }
    }
    scenarios.emplace_back(std::move(d));
  }
  return DesignMdpInstance(DesignSpace(std::move(space)), std::move(design_cost), std::move(scenarios));
}

}  // namespace mdpdesign
