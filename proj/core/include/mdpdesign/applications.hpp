#pragma once

// Builders that compile three application models into DesignMdpInstance form:
// component reliability, inventory location, and queue staffing. Each builder
// validates its config (InvariantError) and enforces state-space caps
// (SizeLimitError). Configs can also be read from JSON.

#include <cstddef>
#include <string_view>
#include <vector>

#include "mdpdesign/design.hpp"

namespace mdpdesign::app {

struct SizeCaps {
  std::size_t max_states = 1024;
  std::size_t max_state_actions = 1 << 16;
};

// ---------------------------------------------------------------- reliability

struct ReliabilityOption {
  double purchase_cost = 0.0;
  double operation_cost = 0.0;  // per period while selected
  double downtime_cost = 0.0;   // per period while selected and failed
  double repair_cost = 0.0;     // per repair attempt
};

/// A system slot that needs exactly one of its options.
struct ReliabilitySlot {
  std::vector<ReliabilityOption> options;
};

struct ReliabilityScenario {
  double probability = 1.0;
  double discount = 0.9;
  std::vector<double> failure_prob;  // per option, slot-major
  std::vector<double> repair_prob;   // success probability of one repair attempt
  double repair_cost_factor = 1.0;
};

/// Design: one binary per option, budget row c.x <= budget and one
/// exactly-one row per slot. State: failed/working bit per option (bit o set
/// when option o is failed). Action: subset of options to repair (bit mask).
/// Status bits of unselected options carry zero cost, so they have no effect.
/// Every system starts with all options working.
struct ReliabilityConfig {
  std::vector<ReliabilitySlot> slots;
  double budget = 0.0;
  std::vector<ReliabilityScenario> scenarios;
  SizeCaps caps;

  std::size_t num_options() const;
};

DesignMdpInstance build_reliability_instance(const ReliabilityConfig& config);
ReliabilityConfig parse_reliability_config(std::string_view json_text);

// ------------------------------------------------------------------ inventory

struct InventoryLocation {
  double startup_cost = 0.0;
  int capacity = 1;
  double initial_unit_cost = 0.0;
};

struct InventoryLocationScenario {
  std::vector<int> demand_levels;                     // demand quantity of each level
  std::vector<std::vector<double>> demand_transition;  // [level][next level]
  std::vector<double> initial_demand;                  // distribution over levels
  double order_cost = 0.0;     // per unit ordered
  double holding_cost = 0.0;   // per unit left over
  double shortage_cost = 0.0;  // per unit of lost demand
  double revenue = 0.0;        // per unit sold
  double fixed_cost = 0.0;     // per period while open
  double order_penalty = 1e3;  // per unit ordered at a closed location
};

struct InventoryScenario {
  double probability = 1.0;
  double discount = 0.9;
  std::vector<InventoryLocationScenario> locations;
};

/// Design: binary x (open location) with 1.x = select; when
/// `initial_inventory` is set, continuous u_i (ordered before opening, at
/// initial_unit_cost) precede x with 0 <= u_i <= m_i x_i. u enters the design
/// cost only; the operational chain starts empty.
///
/// State per location: (inventory 0..m_i, demand level); action per location:
/// order quantity 0..m_i. Ordering beyond capacity discards the excess and
/// costs `overflow_penalty`; inventory at a closed location costs
/// `capacity_penalty` (both multiplied by indicators that are affine in x).
struct InventoryConfig {
  std::vector<InventoryLocation> locations;
  int select = 1;
  bool initial_inventory = false;
  double capacity_penalty = 1e3;
  double overflow_penalty = 1e3;
  std::vector<InventoryScenario> scenarios;
  SizeCaps caps;
};

DesignMdpInstance build_inventory_instance(const InventoryConfig& config);
InventoryConfig parse_inventory_config(std::string_view json_text);

// ---------------------------------------------------------------------- queue

enum class ArrivalModel { Categorical, Poisson, Bernoulli };

struct QueueServerType {
  double recruit_cost = 0.0;
  int limit = 1;  // r_i
};

struct QueueScenario {
  double probability = 1.0;
  double discount = 0.9;
  std::vector<std::vector<double>> success_prob;  // [server type][customer type]
  std::vector<std::vector<double>> reward;        // [server type][customer type]
  std::vector<double> operating_cost;             // per server per period
  ArrivalModel arrival_model = ArrivalModel::Poisson;
  std::vector<double> arrival_rate;                // per customer type (Poisson, Bernoulli)
  std::vector<std::vector<double>> arrival_probs;  // per customer type over 0..capacity (Categorical)
};

/// Design: integer server counts x_i in [0, r_i] followed by unary binaries
/// y_{i,l} (l = 1..r_i) with x_i = sum_l y_{i,l} and y_{i,l+1} <= y_{i,l}, so
/// y_{i,l} = [x_i >= l]. Leader rows x <= r and 1.x <= total_limit.
///
/// State: queue length per customer type, 0..capacity_j. Action: number of
/// customers of type j assigned to server type i, 0..r_i per pair. Using l >= 1
/// servers of type i costs mask_cost (1 - y_{i,l}); serving more customers
/// than are waiting costs mask_cost. Arrivals beyond capacity are rejected at
/// rejection_penalty each (expected overflow is charged).
struct QueueConfig {
  std::vector<QueueServerType> servers;
  int total_limit = 0;
  std::vector<int> capacity;         // per customer type
  std::vector<double> waiting_cost;  // per waiting customer per period; empty means zero
  double rejection_penalty = 0.0;
  double mask_cost = kProhibitiveCost;
  std::vector<QueueScenario> scenarios;
  SizeCaps caps;
};

/// Distribution of per-period arrivals truncated to 0..capacity (tail mass
/// lumped into capacity for Poisson; Bernoulli puts min(rate, 1) on one arrival).
std::vector<double> arrival_distribution(ArrivalModel model, double rate, int capacity);

DesignMdpInstance build_queue_instance(const QueueConfig& config);
QueueConfig parse_queue_config(std::string_view json_text);

}  // namespace mdpdesign::app
