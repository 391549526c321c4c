#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdpdesign/linear_solver.hpp"
#include "mdpdesign/mdp.hpp"

namespace mdpdesign {

inline constexpr double kDefaultFeasibilityTol = 1e-6;

/// The leader's mixed-integer polyhedron. Variables are ordered with the n1
/// continuous ones first, followed by n2 integer (or binary) ones.
class DesignSpace {
 public:
  struct Data {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::vector<VarBounds> bounds;
    std::vector<VarKind> integrality;
    std::vector<LinearRow> constraints;

    bool operator==(const Data&) const = default;
  };

  DesignSpace() = default;
  explicit DesignSpace(Data data);

  std::size_t n1() const { return data_.n1; }
  std::size_t n2() const { return data_.n2; }
  std::size_t size() const { return data_.n1 + data_.n2; }
  const std::vector<VarBounds>& bounds() const { return data_.bounds; }
  const std::vector<VarKind>& integrality() const { return data_.integrality; }
  const std::vector<LinearRow>& constraints() const { return data_.constraints; }
  const Data& data() const { return data_; }

  bool operator==(const DesignSpace&) const = default;

  static std::vector<std::string> check(const Data& data);

 private:
  Data data_;
};

/// True iff x is within `tol` of the bounds, every integer entry is within
/// `tol` of an integer, and every constraint row holds within `tol`.
bool check_design_feasible(const DesignSpace& space, std::span<const double> x,
                           double tol = kDefaultFeasibilityTol);

/// Design space, design costs and the scenario MDPs.
class DesignMdpInstance {
 public:
  DesignMdpInstance(DesignSpace design, std::vector<double> design_cost, std::vector<ScenarioMdp> scenarios);

  const DesignSpace& design() const { return design_; }
  const std::vector<double>& design_cost() const { return design_cost_; }
  const std::vector<ScenarioMdp>& scenarios() const { return scenarios_; }
  std::size_t num_design_vars() const { return design_.size(); }

  bool operator==(const DesignMdpInstance&) const = default;

  static std::vector<std::string> check(const DesignSpace& design, const std::vector<double>& design_cost,
                                        const std::vector<ScenarioMdp>& scenarios);

 private:
  DesignSpace design_;
  std::vector<double> design_cost_;
  std::vector<ScenarioMdp> scenarios_;
};

struct ScenarioOutcome {
  ValueFunction value;
  DecisionRule rule;
  double expected_cost = 0.0;  // u_k = alpha_k . v_k
};

struct ObjectiveBreakdown {
  double objective = 0.0;
  double design_cost = 0.0;  // c . x
  std::vector<ScenarioOutcome> per_scenario;
};

/// c.x + sum_k q_k alpha_k.v_k(x), each scenario solved by policy iteration.
/// Throws InvariantError when x is infeasible for the design space.
ObjectiveBreakdown objective_at(const DesignMdpInstance& instance, std::span<const double> x,
                                double tol = kDefaultFeasibilityTol);

/// As objective_at but without the feasibility check; x may be any point of
/// the right length (used for relaxation and concavity checks).
ObjectiveBreakdown evaluate_design(const DesignMdpInstance& instance, std::span<const double> x);

enum class SolveMethod { Enumeration, MipReformulation };

const char* to_string(SolveMethod method);

struct IntegratedStats {
  double solve_ms = 0.0;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  std::int64_t designs_evaluated = 0;
  double mip_objective = 0.0;  // MIP route only
};

struct IntegratedSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<ScenarioOutcome> per_scenario;
  SolveMethod method = SolveMethod::Enumeration;
  IntegratedStats stats;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Recomputes c.x + sum_k q_k u_k from the parts of a solution.
double recompute_objective(const DesignMdpInstance& instance, const IntegratedSolution& solution);

}  // namespace mdpdesign
