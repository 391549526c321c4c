#pragma once

// Single-level big-M MIP for the design problem. Every scenario's MDP LP is
// replaced by primal feasibility, dual feasibility of the occupancy LP and
// complementary slackness linearized through binaries delta:
//
//   min  c.x + sum_k q_k sum_s alpha_ks v_ks
//   s.t. leader rows and bounds on x
//        v_s - lambda sum_j p(j|s,a) v_j - f.x              <= g              (s,a,k)
//        sum_a gamma_sa - lambda sum_{j,a} gamma_ja p(s|j,a)  = q_k alpha_s    (s,k)
//        gamma_sa - M delta_sa                              <= 0              (s,a,k)
//        f.x - v_s + lambda sum_j p(j|s,a) v_j + M' delta_sa <= M' - g         (s,a,k)
//        gamma >= 0, delta binary, v free.

#include <span>
#include <vector>

#include "mdpdesign/design.hpp"
#include "mdpdesign/linear_solver.hpp"

namespace mdpdesign {

enum class BigMKind { Uniform, PerStateLp };

const char* to_string(BigMKind kind);

struct BigMPair {
  double m = 0.0;        // bound on occupancy gamma
  double m_prime = 0.0;  // bound on the primal slack of a Bellman row
};

struct BigMScheme {
  BigMKind kind = BigMKind::Uniform;
  /// values[k][s]; the uniform scheme repeats one pair per scenario.
  std::vector<std::vector<BigMPair>> values;

  const BigMPair& at(std::size_t k, int s) const { return values[k][static_cast<std::size_t>(s)]; }
};

/// Uniform: M_k = 1/(1-lambda_k), M'_k = max(t_k - l_k, 1)/(1-lambda_k) where
/// t_k is the largest immediate cost over the design box (interval
/// arithmetic) and l_k = min(0, smallest immediate cost over the box). For
/// nonnegative costs l_k = 0 and M'_k = max(t_k, 1)/(1-lambda_k).
///
/// Per-state: M_sk = 1/(1-lambda_k); M'_sk uses the largest immediate cost
/// over the LP relaxation of the design polyhedron, maximized over the
/// state-action pairs reachable from s, shifted by l_k and clipped to the
/// uniform value.
///
/// Throws UnboundedDesignError naming the variable when a cost-coupled design
/// variable is unbounded.
BigMScheme compute_big_m(const DesignMdpInstance& instance, BigMKind kind);

/// Column and row layout of the reformulated model.
struct IndexMap {
  std::size_t n = 0;
  std::vector<int> num_states;
  std::vector<int> num_actions;
  std::vector<std::size_t> v_offset;
  std::vector<std::size_t> gamma_offset;
  std::vector<std::size_t> delta_offset;
  std::size_t num_columns = 0;

  std::size_t leader_rows = 0;
  std::vector<std::size_t> bellman_row;     // first row of scenario k's (s,a) Bellman block
  std::vector<std::size_t> balance_row;     // first row of the (s) balance block
  std::vector<std::size_t> activation_row;  // first row of the (s,a) gamma <= M delta block
  std::vector<std::size_t> slack_row;       // first row of the (s,a) slack <= M'(1-delta) block

  std::size_t x(std::size_t i) const { return i; }
  std::size_t v(std::size_t k, int s) const { return v_offset[k] + s; }
  std::size_t gamma(std::size_t k, int s, int a) const {
    return gamma_offset[k] + static_cast<std::size_t>(s) * num_actions[k] + a;
  }
  std::size_t delta(std::size_t k, int s, int a) const {
    return delta_offset[k] + static_cast<std::size_t>(s) * num_actions[k] + a;
  }
};

struct ReformulatedMip {
  MipModel model;
  IndexMap index_map;
};

ReformulatedMip build_single_level_mip(const DesignMdpInstance& instance, const BigMScheme& scheme);

struct SolverConfig {
  const MipBackend* backend = nullptr;  // nullptr selects the internal solver
  MipOptions options;
  /// Relative tolerance of the big-M validity check.
  double validity_tol = 1e-6;
  /// Multiplies every computed M and M'. Values below 1 may invalidate the
  /// reformulation; the validity check then reports it.
  double bigm_scale = 1.0;
};

/// Everything produced on the way to an IntegratedSolution.
struct ReformulationRun {
  BigMScheme scheme;
  ReformulatedMip mip;
  SolveResult result;
};

/// Builds and solves the reformulated MIP, then re-solves every scenario MDP
/// at the MIP's x by policy iteration. Reported values and rules come from the
/// re-solve. Throws BigMValidityError if the re-derived objective differs from
/// the MIP objective by more than validity_tol (relative), and also when the
/// MIP is infeasible although the design space is not (mip_objective() is
/// then +infinity and the re-derived objective belongs to a feasible design).
IntegratedSolution solve_integrated(const DesignMdpInstance& instance, BigMKind kind,
                                    const SolverConfig& config = {}, ReformulationRun* run = nullptr);

/// argmax_a gamma_{s,a} per state from a MIP solution. States whose occupancy
/// row is numerically zero take the action of `fallback`.
DecisionRule extract_policy_from_duals(const SolveResult& result, const IndexMap& index_map, std::size_t scenario,
                                       const DecisionRule& fallback);

/// max over (s,a,k) of gamma * slack / (M * M') at `primal`.
double max_scaled_complementarity(const DesignMdpInstance& instance, const ReformulatedMip& mip,
                                  const BigMScheme& scheme, std::span<const double> primal);

/// max over k of | sum_{s,a} gamma_{s,a,k} - q_k / (1 - lambda_k) |.
double max_occupancy_error(const DesignMdpInstance& instance, const IndexMap& index_map,
                           std::span<const double> primal);

/// The two-level form for third-party bilevel solvers. The leader model
/// holds x and every follower's v (leader rows only, objective
/// c.x + sum_k q_k alpha_k.v_k); follower k maximizes 1.v_k over its Bellman
/// rows, with the x columns present as linking variables.
struct BilevelModels {
  MipModel leader;
  std::vector<MipModel> followers;
  std::vector<std::vector<std::string>> follower_variables;  // v names per follower
  std::vector<std::string> linking_variables;                // x names
};

BilevelModels build_bilevel_models(const DesignMdpInstance& instance);

}  // namespace mdpdesign
