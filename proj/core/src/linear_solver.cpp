#include "mdpdesign/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdpdesign/errors.hpp"

namespace mdpdesign {

const char* to_string(Relation rel) {
  switch (rel) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Integer: return "integer";
    case VarKind::Binary: return "binary";
  }
  return "?";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

std::size_t LpModel::add_variable(double objective_coeff, VarBounds b, std::string name) {
  objective.push_back(objective_coeff);
  bounds.push_back(b);
  if (!name.empty() || !names.empty()) {
    names.resize(bounds.size() - 1);
    names.push_back(std::move(name));
  }
  for (auto& row : rows) row.coeffs.push_back(0.0);
  return bounds.size() - 1;
}

std::size_t LpModel::add_row(const std::vector<std::pair<std::size_t, double>>& terms,
                             Relation rel, double rhs, std::string name) {
  LinearRow row;
  row.coeffs.assign(num_vars(), 0.0);
  for (const auto& [col, coeff] : terms) {
    if (col >= num_vars()) throw DimensionError("add_row: column index out of range");
    row.coeffs[col] += coeff;
  }
  row.rel = rel;
  row.rhs = rhs;
  row.name = std::move(name);
  rows.push_back(std::move(row));
  return rows.size() - 1;
}

void LpModel::validate() const {
  std::vector<std::string> bad;
  const auto n = num_vars();
  if (objective.size() != n) bad.push_back("objective length differs from the variable count");
  if (!names.empty() && names.size() != n) bad.push_back("names length differs from the variable count");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(bounds[j].lower <= bounds[j].upper))
      bad.push_back("variable " + std::to_string(j) + " has lower bound above upper bound");
    if (bounds[j].lower == kInfinity || bounds[j].upper == -kInfinity)
      bad.push_back("variable " + std::to_string(j) + " has an infinite bound on the wrong side");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].coeffs.size() != n)
      bad.push_back("row " + std::to_string(i) + " length differs from the variable count");
    if (!std::isfinite(rows[i].rhs)) bad.push_back("row " + std::to_string(i) + " has a non-finite rhs");
  }
  if (!bad.empty()) throw InvariantError(std::move(bad));
}

void MipModel::validate() const {
  lp.validate();
  std::vector<std::string> bad;
  if (integrality.size() != lp.num_vars()) bad.push_back("integrality length differs from the variable count");
  for (std::size_t j = 0; j < std::min(integrality.size(), lp.num_vars()); ++j) {
    if (integrality[j] == VarKind::Binary && (lp.bounds[j].lower < 0.0 || lp.bounds[j].upper > 1.0))
      bad.push_back("binary variable " + std::to_string(j) + " has bounds outside [0,1]");
  }
  if (!bad.empty()) throw InvariantError(std::move(bad));
}

double max_primal_violation(const LpModel& model, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    worst = std::max(worst, model.bounds[j].lower - x[j]);
    worst = std::max(worst, x[j] - model.bounds[j].upper);
  }
  for (const auto& row : model.rows) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += row.coeffs[j] * x[j];
    switch (row.rel) {
      case Relation::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

namespace {

// Relative row tolerance of the final feasibility check.
constexpr double kVerifyTol = 1e-7;

// How an original variable maps onto nonnegative tableau columns:
// x = shift + sign * x'[pos] - x'[neg].
struct ColumnMap {
  double shift = 0.0;
  double sign = 1.0;
  int pos = -1;
  int neg = -1;
};

enum class PhaseOutcome { Optimal, Unbounded, IterationLimit };

class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows), cols_(cols), stride_(cols + 1), data_((rows + 1) * stride_, 0.0), basis_(rows, -1) {}

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * stride_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * stride_ + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double rhs(int r) const { return at(r, cols_); }
  double& cost(int c) { return at(rows_, c); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int pr, int pc) {
    double* prow = &data_[static_cast<std::size_t>(pr) * stride_];
    const double inv = 1.0 / prow[pc];
    for (int c = 0; c <= cols_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    nonzero_.clear();
    for (int c = 0; c <= cols_; ++c)
      if (prow[c] != 0.0) nonzero_.push_back(c);
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[static_cast<std::size_t>(r) * stride_];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (int c : nonzero_) {
        double v = row[c] - factor * prow[c];
        if (std::abs(v) < 1e-14) v = 0.0;
        row[c] = v;
      }
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Primal simplex on the current cost row. Columns with allowed[c] == false
  // never enter the basis.
  PhaseOutcome optimize(const std::vector<char>& allowed, const LpOptions& opt, std::int64_t& iterations,
                        std::int64_t limit) {
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      int enter = -1;
      double best = -opt.optimality_tol;
      for (int c = 0; c < cols_; ++c) {
        if (!allowed[c]) continue;
        const double d = cost(c);
        if (d < best) {
          enter = c;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return PhaseOutcome::Optimal;
      if (iterations >= limit) return PhaseOutcome::IterationLimit;

      int leave = -1;
      double min_ratio = kInfinity;
      double leave_elem = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(rhs(r), 0.0) / a;
        if (leave < 0 || ratio < min_ratio - 1e-12 * (1.0 + min_ratio)) {
          leave = r;
          min_ratio = ratio;
          leave_elem = a;
        } else if (ratio <= min_ratio + 1e-12 * (1.0 + min_ratio)) {
          // Tie: Bland keeps the lowest basic index, otherwise prefer the
          // larger pivot element.
          const bool take = bland ? basis_[r] < basis_[leave] : a > leave_elem;
          if (take) {
            leave = r;
            leave_elem = a;
            min_ratio = std::min(min_ratio, ratio);
          }
        }
      }
      if (leave < 0) return PhaseOutcome::Unbounded;

      if (min_ratio <= 1e-12) {
        if (++degenerate_run >= opt.degeneracy_streak) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(leave, enter);
      ++iterations;
    }
  }

 private:
  int rows_;
  int cols_;
  int stride_;
  std::vector<double> data_;
  std::vector<int> basis_;
  std::vector<int> nonzero_;
};

}  // namespace

SolveResult solve_lp(const LpModel& model, const LpOptions& options) {
  model.validate();
  const int n = static_cast<int>(model.num_vars());
  const int m_orig = static_cast<int>(model.num_rows());

  SolveResult result;

  // Map original variables onto nonnegative columns.
  std::vector<ColumnMap> maps(n);
  int n_struct = 0;
  std::vector<std::pair<int, double>> bound_rows;  // (column, upper - lower)
  for (int j = 0; j < n; ++j) {
    const auto [lo, up] = model.bounds[j];
    auto& mp = maps[j];
    if (std::isfinite(lo) && std::isfinite(up) && lo == up) {
      mp.shift = lo;
    } else if (std::isfinite(lo)) {
      mp.shift = lo;
      mp.pos = n_struct++;
      if (std::isfinite(up)) bound_rows.emplace_back(mp.pos, up - lo);
    } else if (std::isfinite(up)) {
      mp.shift = up;
      mp.sign = -1.0;
      mp.pos = n_struct++;
    } else {
      mp.pos = n_struct++;
      mp.neg = n_struct++;
    }
  }

  const int m = m_orig + static_cast<int>(bound_rows.size());
  std::vector<std::vector<double>> a(m, std::vector<double>(n_struct, 0.0));
  std::vector<double> b(m, 0.0);
  std::vector<Relation> rel(m, Relation::LessEqual);
  std::vector<double> row_sign(m, 1.0);

  for (int i = 0; i < m_orig; ++i) {
    const auto& row = model.rows[i];
    double rhs = row.rhs;
    for (int j = 0; j < n; ++j) {
      const double coef = row.coeffs[j];
      if (coef == 0.0) continue;
      rhs -= coef * maps[j].shift;
      if (maps[j].pos >= 0) a[i][maps[j].pos] += coef * maps[j].sign;
      if (maps[j].neg >= 0) a[i][maps[j].neg] -= coef;
    }
    b[i] = rhs;
    rel[i] = row.rel;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const int i = m_orig + static_cast<int>(k);
    a[i][bound_rows[k].first] = 1.0;
    b[i] = bound_rows[k].second;
    rel[i] = Relation::LessEqual;
  }
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      for (double& v : a[i]) v = -v;
      b[i] = -b[i];
      row_sign[i] = -1.0;
      if (rel[i] == Relation::LessEqual)
        rel[i] = Relation::GreaterEqual;
      else if (rel[i] == Relation::GreaterEqual)
        rel[i] = Relation::LessEqual;
    }
  }

  // Column layout: structural | slack or surplus per inequality | artificial
  // per >= or = row. unit_col[i] is the column holding +e_i initially.
  int cols = n_struct;
  std::vector<int> slack_col(m, -1), art_col(m, -1), unit_col(m, -1);
  for (int i = 0; i < m; ++i)
    if (rel[i] != Relation::Equal) slack_col[i] = cols++;
  const int first_art = cols;
  for (int i = 0; i < m; ++i)
    if (rel[i] != Relation::LessEqual) art_col[i] = cols++;

  Tableau t(m, cols);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < n_struct; ++c) t.at(i, c) = a[i][c];
    if (rel[i] == Relation::LessEqual) {
      t.at(i, slack_col[i]) = 1.0;
      unit_col[i] = slack_col[i];
      t.basis()[i] = slack_col[i];
    } else {
      if (rel[i] == Relation::GreaterEqual) t.at(i, slack_col[i]) = -1.0;
      t.at(i, art_col[i]) = 1.0;
      unit_col[i] = art_col[i];
      t.basis()[i] = art_col[i];
    }
    t.rhs(i) = b[i];
  }

  const std::int64_t limit =
      options.iteration_limit > 0 ? options.iteration_limit : 100 * static_cast<std::int64_t>(m_orig + n + 1);
  std::int64_t iterations = 0;
  std::vector<char> allowed(cols, 1);

  // Phase 1: minimize the sum of artificials.
  if (first_art < cols) {
    for (int i = 0; i < m; ++i) {
      if (art_col[i] < 0) continue;
      for (int c = 0; c <= cols; ++c)
        if (c < first_art || c == cols) t.at(m, c) -= t.at(i, c);
    }
    const auto outcome = t.optimize(allowed, options, iterations, limit);
    if (outcome == PhaseOutcome::IterationLimit) {
      result.status = SolveStatus::IterationLimit;
      result.stats.iterations = iterations;
      result.stats.lp_solves = 1;
      return result;
    }
    double bmax = 0.0;
    for (double v : b) bmax = std::max(bmax, v);
    if (-t.rhs(m) > options.feasibility_tol * (1.0 + bmax)) {
      result.status = SolveStatus::Infeasible;
      result.stats.iterations = iterations;
      result.stats.lp_solves = 1;
      return result;
    }
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and keep their artificial at zero. The
    // leftover value is rounding noise and is cleared first, so a pivot on a
    // small element cannot blow it up.
    for (int r = 0; r < m; ++r) {
      if (t.basis()[r] < first_art) continue;
      t.rhs(r) = 0.0;
      int best = -1;
      double best_abs = 1e-9;
      for (int c = 0; c < first_art; ++c) {
        if (std::abs(t.at(r, c)) > best_abs) {
          best_abs = std::abs(t.at(r, c));
          best = c;
        }
      }
      if (best >= 0) t.pivot(r, best);
    }
    for (int c = first_art; c < cols; ++c) allowed[c] = 0;
  }

  // Phase 2 cost row (always minimization internally).
  const double sense_sign = model.sense == Sense::Minimize ? 1.0 : -1.0;
  std::vector<double> cvec(cols, 0.0);
  for (int j = 0; j < n; ++j) {
    const double cj = sense_sign * model.objective[j];
    if (maps[j].pos >= 0) cvec[maps[j].pos] += cj * maps[j].sign;
    if (maps[j].neg >= 0) cvec[maps[j].neg] -= cj;
  }
  for (int c = 0; c <= cols; ++c) t.at(m, c) = c < cols ? cvec[c] : 0.0;
  for (int r = 0; r < m; ++r) {
    const double cb = cvec[t.basis()[r]];
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(r, c);
  }
  const auto outcome = t.optimize(allowed, options, iterations, limit);
  result.stats.iterations = iterations;
  result.stats.lp_solves = 1;
  if (outcome == PhaseOutcome::IterationLimit) {
    result.status = SolveStatus::IterationLimit;
    return result;
  }
  if (outcome == PhaseOutcome::Unbounded) {
    result.status = SolveStatus::Unbounded;
    return result;
  }

  std::vector<double> xs(cols, 0.0);
  for (int r = 0; r < m; ++r) xs[t.basis()[r]] = std::max(t.rhs(r), 0.0);
  result.primal.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double v = maps[j].shift;
    if (maps[j].pos >= 0) v += maps[j].sign * xs[maps[j].pos];
    if (maps[j].neg >= 0) v -= xs[maps[j].neg];
    result.primal[j] = v;
  }
  result.dual.assign(m_orig, 0.0);
  for (int i = 0; i < m_orig; ++i) {
    const double y_std = -t.at(m, unit_col[i]);
    result.dual[i] = sense_sign * row_sign[i] * y_std;
  }
  result.reduced_costs = model.objective;
  for (int i = 0; i < m_orig; ++i) {
    const double y = result.dual[i];
    if (y == 0.0) continue;
    const auto& coeffs = model.rows[i].coeffs;
    for (int j = 0; j < n; ++j) result.reduced_costs[j] -= y * coeffs[j];
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += model.objective[j] * result.primal[j];
  result.objective = obj;

  // Accumulated rounding can leave a basis that is feasible for the tableau
  // but not for the model. Check every row against its own scale.
  for (int i = 0; i < m_orig; ++i) {
    const auto& row = model.rows[i];
    double activity = 0.0, scale = 1.0 + std::abs(row.rhs);
    for (int j = 0; j < n; ++j) {
      const double term = row.coeffs[j] * result.primal[j];
      activity += term;
      scale = std::max(scale, std::abs(term));
    }
    const double excess = row.rel == Relation::LessEqual ? activity - row.rhs
                          : row.rel == Relation::GreaterEqual ? row.rhs - activity
                                                              : std::abs(activity - row.rhs);
    if (excess > kVerifyTol * scale) {
      result = SolveResult{};
      result.status = SolveStatus::Infeasible;
      result.stats.iterations = iterations;
      result.stats.lp_solves = 1;
      return result;
    }
  }
  result.status = SolveStatus::Optimal;
  return result;
}

}  // namespace mdpdesign
