#pragma once

// Brute-force baseline: enumerate every feasible integer design and solve all
// scenario MDPs for each one.

#include <cstdint>
#include <optional>
#include <vector>

#include "mdpdesign/design.hpp"

namespace mdpdesign {

struct OracleOptions {
  /// Largest bound box (number of integer points) the enumerator accepts.
  std::uint64_t max_box_points = 1'000'000;
  double feasibility_tol = kDefaultFeasibilityTol;
};

/// Lexicographic walk over the integer points of the bound box, yielding only
/// points that satisfy every design constraint.
///
/// Throws UnsupportedDesignError if the space has continuous variables and
/// SizeLimitError if the box holds more than `max_box_points` points.
class DesignEnumerator {
 public:
  explicit DesignEnumerator(const DesignSpace& space, const OracleOptions& options = {});

  /// Next feasible design, or nullopt once the box is exhausted.
  std::optional<std::vector<double>> next();

  std::uint64_t box_points() const { return box_points_; }

 private:
  const DesignSpace& space_;
  double tol_;
  std::vector<double> current_;
  std::uint64_t box_points_ = 1;
  bool done_ = false;
  bool started_ = false;
};

std::vector<std::vector<double>> enumerate_designs(const DesignSpace& space, const OracleOptions& options = {});

/// argmin of objective_at over all enumerated designs; ties go to the
/// lexicographically smallest x. Status is Infeasible when no design exists.
IntegratedSolution brute_force_solve(const DesignMdpInstance& instance, const OracleOptions& options = {});

}  // namespace mdpdesign
