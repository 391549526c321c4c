#pragma once

// Dense two-phase simplex and LP-based branch-and-bound.
//
// Dual sign convention: `SolveResult::dual[i]` is the sensitivity of the
// optimal objective to the right-hand side of row i, d(objective)/d(rhs_i).
// For a maximization problem with <= rows the multipliers are nonnegative and
// the dual objective is sum_i dual[i] * rhs[i] (plus bound terms, which vanish
// for free variables). For a minimization problem with >= rows they are
// nonnegative as well; <= rows of a minimization carry nonpositive multipliers.
// `reduced_costs[j] = objective[j] - sum_i dual[i] * a_ij`.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mdpdesign {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };
enum class VarKind { Continuous, Integer, Binary };

const char* to_string(Relation rel);
const char* to_string(VarKind kind);

struct VarBounds {
  double lower = 0.0;
  double upper = kInfinity;

  bool operator==(const VarBounds&) const = default;
};

/// A dense linear row `coeffs . x  rel  rhs`.
struct LinearRow {
  std::vector<double> coeffs;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;

  bool operator==(const LinearRow&) const = default;
};

struct LpModel {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<LinearRow> rows;
  std::vector<VarBounds> bounds;
  std::vector<std::string> names;  // optional; empty or one per variable

  std::size_t num_vars() const { return bounds.size(); }
  std::size_t num_rows() const { return rows.size(); }

  /// Appends a variable with zero coefficients in every existing row.
  std::size_t add_variable(double objective_coeff, VarBounds b, std::string name = {});

  /// Appends a row given as (column, coefficient) terms.
  std::size_t add_row(const std::vector<std::pair<std::size_t, double>>& terms, Relation rel,
                      double rhs, std::string name = {});

  /// Throws InvariantError when lengths disagree or some lower > upper.
  void validate() const;
};

struct MipModel {
  LpModel lp;
  std::vector<VarKind> integrality;

  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

const char* to_string(SolveStatus status);

struct SolveStats {
  std::int64_t iterations = 0;  // simplex pivots, summed over all LPs for a MIP
  std::int64_t nodes = 0;       // branch-and-bound nodes processed (0 for an LP)
  std::int64_t lp_solves = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> primal;
  std::vector<double> dual;           // one per row; LP only
  std::vector<double> reduced_costs;  // one per variable; LP only
  double objective = 0.0;
  SolveStats stats;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct LpOptions {
  /// 0 selects the default cap of 100 * (rows + vars).
  std::int64_t iteration_limit = 0;
  /// Consecutive degenerate pivots after which Bland's rule takes over.
  int degeneracy_streak = 25;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
};

SolveResult solve_lp(const LpModel& model, const LpOptions& options = {});

struct MipOptions {
  std::int64_t node_limit = 1'000'000;
  double integrality_tol = 1e-6;
  /// Nodes whose bound is within this relative gap of the incumbent are pruned.
  double relative_gap = 1e-9;
  LpOptions lp;
};

/// Best-first branch-and-bound on the most fractional variable (lowest index
/// on ties). Integral LP points are polished by re-solving with the integer
/// columns fixed at their rounded values before they become incumbents.
SolveResult solve_mip(const MipModel& model, const MipOptions& options = {});

/// Hook for swapping an external MIP engine in behind `solve_mip`'s contract.
class MipBackend {
 public:
  virtual ~MipBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const MipModel& model, const MipOptions& options) const = 0;
};

class InternalMipBackend final : public MipBackend {
 public:
  std::string name() const override { return "internal-bnb"; }
  SolveResult solve(const MipModel& model, const MipOptions& options) const override {
    return solve_mip(model, options);
  }
};

const MipBackend& internal_backend();

/// Worst violation of rows and bounds by `x` (0 when feasible).
double max_primal_violation(const LpModel& model, const std::vector<double>& x);

/// LP text format (objective, rows, bounds, integrality sections).
std::string to_lp_format(const LpModel& model);
std::string to_lp_format(const MipModel& model);

}  // namespace mdpdesign
