#include "mdpdesign/design.hpp"

#include <cmath>
#include <numeric>

#include "mdpdesign/errors.hpp"

namespace mdpdesign {

const char* to_string(SolveMethod method) {
  return method == SolveMethod::Enumeration ? "enumeration" : "mip_reformulation";
}

std::vector<std::string> DesignSpace::check(const Data& d) {
  std::vector<std::string> bad;
  const std::size_t n = d.n1 + d.n2;
  if (d.bounds.size() != n) bad.push_back("bounds length differs from n1 + n2");
  if (d.integrality.size() != n) bad.push_back("integrality length differs from n1 + n2");
  if (!bad.empty()) return bad;
  for (std::size_t j = 0; j < n; ++j) {
    const auto [lo, up] = d.bounds[j];
    const std::string var = "design variable " + std::to_string(j);
    if (!(lo <= up)) bad.push_back(var + " has lower bound above upper bound");
    const bool continuous = d.integrality[j] == VarKind::Continuous;
    if (j < d.n1 && !continuous) bad.push_back(var + " must be continuous (first n1 variables)");
    if (j >= d.n1 && continuous) bad.push_back(var + " must be integer or binary (last n2 variables)");
    if (!continuous && (!std::isfinite(lo) || !std::isfinite(up))) bad.push_back(var + " is integer with an infinite bound");
    if (d.integrality[j] == VarKind::Binary && (lo < 0.0 || up > 1.0)) bad.push_back(var + " is binary with bounds outside [0,1]");
  }
  for (std::size_t i = 0; i < d.constraints.size(); ++i) {
    if (d.constraints[i].coeffs.size() != n)
      bad.push_back("design constraint " + std::to_string(i) + " has " +
                    std::to_string(d.constraints[i].coeffs.size()) + " coefficients, expected " + std::to_string(n));
    if (!std::isfinite(d.constraints[i].rhs)) bad.push_back("design constraint " + std::to_string(i) + " has a non-finite rhs");
  }
  return bad;
}

DesignSpace::DesignSpace(Data data) : data_(std::move(data)) {
  if (auto bad = check(data_); !bad.empty()) throw InvariantError(std::move(bad));
}

bool check_design_feasible(const DesignSpace& space, std::span<const double> x, double tol) {
  if (x.size() != space.size())
    throw DimensionError("design vector has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(space.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto [lo, up] = space.bounds()[j];
    if (x[j] < lo - tol || x[j] > up + tol) return false;
    if (space.integrality()[j] != VarKind::Continuous && std::abs(x[j] - std::round(x[j])) > tol) return false;
  }
  for (const auto& row : space.constraints()) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += row.coeffs[j] * x[j];
    switch (row.rel) {
      case Relation::LessEqual:
        if (lhs > row.rhs + tol) return false;
        break;
      case Relation::GreaterEqual:
        if (lhs < row.rhs - tol) return false;
        break;
      case Relation::Equal:
        if (std::abs(lhs - row.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

std::vector<std::string> DesignMdpInstance::check(const DesignSpace& design, const std::vector<double>& design_cost,
                                                  const std::vector<ScenarioMdp>& scenarios) {
  std::vector<std::string> bad;
  const std::size_t n = design.size();
  if (design_cost.size() != n)
    bad.push_back("design_cost has length " + std::to_string(design_cost.size()) + ", expected " + std::to_string(n));
  if (scenarios.empty()) bad.push_back("instance has no scenarios");
  double total = 0.0;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    total += scenarios[k].probability();
    if (scenarios[k].design_dim() != n)
      bad.push_back("scenario " + std::to_string(k) + " cost vectors have length " +
                    std::to_string(scenarios[k].design_dim()) + ", expected " + std::to_string(n));
  }
  if (!scenarios.empty() && std::abs(total - 1.0) > 1e-9)
    bad.push_back("scenario probabilities sum to " + std::to_string(total) + ", expected 1");
  return bad;
}

DesignMdpInstance::DesignMdpInstance(DesignSpace design, std::vector<double> design_cost,
                                     std::vector<ScenarioMdp> scenarios)
    : design_(std::move(design)), design_cost_(std::move(design_cost)), scenarios_(std::move(scenarios)) {
  if (auto bad = check(design_, design_cost_, scenarios_); !bad.empty()) throw InvariantError(std::move(bad));
}

ObjectiveBreakdown evaluate_design(const DesignMdpInstance& instance, std::span<const double> x) {
  if (x.size() != instance.num_design_vars()) throw DimensionError("design vector length differs from n");
  ObjectiveBreakdown out;
  for (std::size_t j = 0; j < x.size(); ++j) out.design_cost += instance.design_cost()[j] * x[j];
  out.objective = out.design_cost;
  out.per_scenario.reserve(instance.scenarios().size());
  // Fixed-order accumulation keeps the result independent of evaluation order.
  for (const auto& mdp : instance.scenarios()) {
    auto sol = policy_iteration(mdp, x);
    ScenarioOutcome outcome;
    outcome.expected_cost = expected_initial_value(mdp, sol.value);
    outcome.value = std::move(sol.value);
    outcome.rule = std::move(sol.rule);
    out.objective += mdp.probability() * outcome.expected_cost;
    out.per_scenario.push_back(std::move(outcome));
  }
  return out;
}

ObjectiveBreakdown objective_at(const DesignMdpInstance& instance, std::span<const double> x, double tol) {
  if (!check_design_feasible(instance.design(), x, tol))
    throw InvariantError({"design vector is infeasible for the design space"});
  return evaluate_design(instance, x);
}

double recompute_objective(const DesignMdpInstance& instance, const IntegratedSolution& solution) {
  double total = 0.0;
  for (std::size_t j = 0; j < solution.x.size(); ++j) total += instance.design_cost()[j] * solution.x[j];
  for (std::size_t k = 0; k < solution.per_scenario.size(); ++k)
    total += instance.scenarios()[k].probability() * solution.per_scenario[k].expected_cost;
  return total;
}

}  // namespace mdpdesign
