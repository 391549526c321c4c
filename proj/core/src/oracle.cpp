#include "mdpdesign/oracle.hpp"

#include <chrono>
#include <cmath>

#include "mdpdesign/errors.hpp"

namespace mdpdesign {

DesignEnumerator::DesignEnumerator(const DesignSpace& space, const OracleOptions& options)
    : space_(space), tol_(options.feasibility_tol) {
  if (space.n1() > 0)
    throw UnsupportedDesignError("enumeration requires an all-integer design space; found " +
                                 std::to_string(space.n1()) + " continuous variable(s)");
  const std::size_t n = space.size();
  current_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = std::ceil(space.bounds()[j].lower - tol_) + 0.0;
    const double up = std::floor(space.bounds()[j].upper + tol_);
    if (up < lo) {
      done_ = true;
      box_points_ = 0;
      return;
    }
    const double range = up - lo + 1.0;
    if (static_cast<double>(box_points_) * range > static_cast<double>(options.max_box_points))
      throw SizeLimitError("design box has more than " + std::to_string(options.max_box_points) + " integer points");
    box_points_ *= static_cast<std::uint64_t>(range);
    current_[j] = lo;
  }
}

std::optional<std::vector<double>> DesignEnumerator::next() {
  while (!done_) {
    if (started_) {
      // Odometer increment with the last coordinate varying fastest, which
      // yields lexicographic order.
      std::size_t j = current_.size();
      while (true) {
        if (j == 0) {
          done_ = true;
          return std::nullopt;
        }
        --j;
        const double up = std::floor(space_.bounds()[j].upper + tol_);
        if (current_[j] + 1.0 <= up) {
          current_[j] += 1.0;
          break;
        }
        current_[j] = std::ceil(space_.bounds()[j].lower - tol_) + 0.0;
      }
    }
    started_ = true;
    if (current_.empty()) {
      done_ = true;
      if (check_design_feasible(space_, current_, tol_)) return current_;
      return std::nullopt;
    }
    if (check_design_feasible(space_, current_, tol_)) return current_;
  }
  return std::nullopt;
}

std::vector<std::vector<double>> enumerate_designs(const DesignSpace& space, const OracleOptions& options) {
  DesignEnumerator it(space, options);
  std::vector<std::vector<double>> out;
  while (auto x = it.next()) out.push_back(std::move(*x));
  return out;
}

IntegratedSolution brute_force_solve(const DesignMdpInstance& instance, const OracleOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  DesignEnumerator it(instance.design(), options);
  IntegratedSolution best;
  best.method = SolveMethod::Enumeration;
  best.status = SolveStatus::Infeasible;
  std::int64_t evaluated = 0;
  while (auto x = it.next()) {
    auto breakdown = evaluate_design(instance, *x);
    ++evaluated;
    // Enumeration is lexicographic, so a strict comparison keeps the
    // lexicographically smallest minimizer.
    if (best.status != SolveStatus::Optimal || breakdown.objective < best.objective) {
      best.status = SolveStatus::Optimal;
      best.x = std::move(*x);
      best.objective = breakdown.objective;
      best.per_scenario = std::move(breakdown.per_scenario);
    }
  }
  best.stats.designs_evaluated = evaluated;
  best.stats.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace mdpdesign
