#pragma once

#include <cstdint>

#include "mdpdesign/design.hpp"

namespace mdpdesign {

/// Dimensions of a random benchmark instance. n is split evenly: the first
/// n/2 design variables are binary, the rest general integers.
struct GenParams {
  int n = 20;
  int m = 40;
  int num_scenarios = 20;
  int num_states = 10;
  int num_actions = 20;
  std::uint64_t seed = 1;

  /// Throws InvariantError if n is odd or any count is not positive.
  void validate() const;
};

/// Distribution constants of the generator.
struct GenConstants {
  static constexpr double kUpperBoundMean = 12.0;
  static constexpr double kUpperBoundStd = 1.0;
  static constexpr double kCoeffMean = 12.0;  // a-bar
  static constexpr double kCoeffStd = 0.5;    // sigma
  static constexpr double kRelProbMean = 1.0;
  static constexpr double kScenarioProbStd = 0.2;
  static constexpr double kInitialProbStd = 0.2;
  static constexpr double kTransitionProbStd = 0.4;
  static constexpr double kRelProbFloor = 0.01;
  static constexpr double kDiscountLo = 0.92;
  static constexpr double kDiscountHi = 0.97;
  static constexpr double kDesignCostLo = 10.0;
  static constexpr double kDesignCostHi = 100.0;
  static constexpr double kSensitivityLo = -1.0;
  static constexpr double kSensitivityHi = 1.0;
  static constexpr double kConstantLo = 10.0;
  static constexpr double kConstantHi = 40.0;
};

/// Mean of the leader right-hand sides: n / (a-bar + 2 sigma).
double leader_rhs_mean(int n);

/// Draws a random instance; identical params give a bit-identical instance.
/// Leader rows are `coeffs . x <= rhs` with coefficients ~ N(12, 0.5) and
/// rhs ~ N(b, b/6); relative probabilities ~ N(1, sd) are floored at 0.01
/// before normalization.
DesignMdpInstance generate_instance(const GenParams& params);

}  // namespace mdpdesign
