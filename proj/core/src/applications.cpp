#include "mdpdesign/applications.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "mdpdesign/errors.hpp"

namespace mdpdesign::app {

namespace {

using json = nlohmann::json;

std::string idx(const std::string& name, std::size_t i) { return name + "[" + std::to_string(i) + "]"; }

/// Product of `sizes`, throwing SizeLimitError once it exceeds `cap`.
std::size_t capped_product(const std::vector<std::size_t>& sizes, std::size_t cap, const std::string& what) {
  std::size_t total = 1;
  for (auto s : sizes) {
    if (s != 0 && total > cap / s) throw SizeLimitError(what + " exceeds the cap of " + std::to_string(cap));
    total *= s;
  }
  if (total > cap) throw SizeLimitError(what + " exceeds the cap of " + std::to_string(cap));
  return total;
}

void check_state_actions(std::size_t states, std::size_t actions, const SizeCaps& caps) {
  capped_product({states}, caps.max_states, "number of states (" + std::to_string(states) + ")");
  capped_product({states, actions}, caps.max_state_actions, "number of state-action pairs");
}

// Mixed-radix digits, digit 0 least significant.
std::vector<int> decode(std::size_t index, const std::vector<int>& radix) {
  std::vector<int> digits(radix.size());
  for (std::size_t i = 0; i < radix.size(); ++i) {
    digits[i] = static_cast<int>(index % radix[i]);
    index /= radix[i];
  }
  return digits;
}

std::size_t encode(const std::vector<int>& digits, const std::vector<int>& radix) {
  std::size_t index = 0;
  for (std::size_t i = radix.size(); i-- > 0;) index = index * radix[i] + digits[i];
  return index;
}

void check_unit_interval(const std::vector<double>& v, std::size_t len, const std::string& what,
                         std::vector<std::string>& bad) {
  if (v.size() != len) {
    bad.push_back(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(len));
    return;
  }
  for (std::size_t i = 0; i < len; ++i)
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) bad.push_back(idx(what, i) + " is outside [0,1]");
}

void throw_if(std::vector<std::string>& bad) {
  if (!bad.empty()) throw InvariantError(std::move(bad));
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

SizeCaps parse_caps(const json& j) {
  SizeCaps caps;
  caps.max_states = value_or(j, "max_states", caps.max_states);
  caps.max_state_actions = value_or(j, "max_state_actions", caps.max_state_actions);
  return caps;
}

template <typename F>
auto parse_guarded(std::string_view text, F&& body) {
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw InvariantError({"config: expected a JSON object"});
    return body(doc);
  } catch (const json::exception& e) {
    throw InvariantError({std::string("config: ") + e.what()});
  }
}

LinearRow make_row(std::size_t n, Relation rel, double rhs, std::string name) {
  LinearRow row;
  row.coeffs.assign(n, 0.0);
  row.rel = rel;
  row.rhs = rhs;
  row.name = std::move(name);
  return row;
}

}  // namespace

// ---------------------------------------------------------------- reliability

std::size_t ReliabilityConfig::num_options() const {
  std::size_t total = 0;
  for (const auto& slot : slots) total += slot.options.size();
  return total;
}

DesignMdpInstance build_reliability_instance(const ReliabilityConfig& config) {
  const std::size_t O = config.num_options();
  std::vector<std::string> bad;
  if (config.slots.empty()) bad.push_back("reliability config has no slots");
  for (std::size_t i = 0; i < config.slots.size(); ++i)
    if (config.slots[i].options.empty()) bad.push_back(idx("slots", i) + " has no options");
  if (config.scenarios.empty()) bad.push_back("reliability config has no scenarios");
  for (std::size_t k = 0; k < config.scenarios.size(); ++k) {
    check_unit_interval(config.scenarios[k].failure_prob, O, idx("scenarios", k) + ".failure_prob", bad);
    check_unit_interval(config.scenarios[k].repair_prob, O, idx("scenarios", k) + ".repair_prob", bad);
  }
  throw_if(bad);
  if (O >= 32) throw SizeLimitError("reliability model has too many options");
  const std::size_t S = std::size_t{1} << O;
  check_state_actions(S, S, config.caps);

  std::vector<ReliabilityOption> options;
  for (const auto& slot : config.slots) options.insert(options.end(), slot.options.begin(), slot.options.end());

  DesignSpace::Data space;
  space.n2 = O;
  space.bounds.assign(O, {0.0, 1.0});
  space.integrality.assign(O, VarKind::Binary);
  auto budget = make_row(O, Relation::LessEqual, config.budget, "budget");
  for (std::size_t o = 0; o < O; ++o) budget.coeffs[o] = options[o].purchase_cost;
  space.constraints.push_back(std::move(budget));
  std::size_t first = 0;
  for (std::size_t i = 0; i < config.slots.size(); ++i) {
    auto row = make_row(O, Relation::Equal, 1.0, idx("slot", i));
    for (std::size_t o = 0; o < config.slots[i].options.size(); ++o) row.coeffs[first + o] = 1.0;
    first += config.slots[i].options.size();
    space.constraints.push_back(std::move(row));
  }
  std::vector<double> design_cost(O);
  for (std::size_t o = 0; o < O; ++o) design_cost[o] = options[o].purchase_cost;

  std::vector<ScenarioMdp> scenarios;
  for (const auto& sc : config.scenarios) {
    ScenarioMdp::Data d;
    d.num_states = static_cast<int>(S);
    d.num_actions = static_cast<int>(S);
    d.discount = sc.discount;
    d.probability = sc.probability;
    d.initial_dist.assign(S, 0.0);
    d.initial_dist[0] = 1.0;
    d.transition.assign(S, std::vector<std::vector<double>>(S));
    d.cost.assign(S, std::vector<AffineCost>(S));
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < S; ++a) {
        AffineCost& cost = d.cost[s][a];
        cost.f.assign(O, 0.0);
        std::vector<double> fail_next(O);
        for (std::size_t o = 0; o < O; ++o) {
          const bool failed = (s >> o) & 1U;
          const bool repaired = (a >> o) & 1U;
          cost.f[o] = options[o].operation_cost + (failed ? options[o].downtime_cost : 0.0);
          if (repaired) cost.g += sc.repair_cost_factor * options[o].repair_cost;
          if (!failed) fail_next[o] = sc.failure_prob[o];
          else fail_next[o] = repaired ? 1.0 - sc.repair_prob[o] : 1.0;
        }
        auto& row = d.transition[s][a];
        row.assign(S, 1.0);
        for (std::size_t t = 0; t < S; ++t)
          for (std::size_t o = 0; o < O; ++o) row[t] *= ((t >> o) & 1U) ? fail_next[o] : 1.0 - fail_next[o];
      }
    }
    scenarios.emplace_back(std::move(d));
  }
  return DesignMdpInstance(DesignSpace(std::move(space)), std::move(design_cost), std::move(scenarios));
}

ReliabilityConfig parse_reliability_config(std::string_view json_text) {
  return parse_guarded(json_text, [](const json& doc) {
    ReliabilityConfig c;
    for (const auto& sj : doc.at("slots")) {
      ReliabilitySlot slot;
      for (const auto& oj : sj.at("options")) {
        ReliabilityOption o;
        o.purchase_cost = oj.at("purchase_cost").get<double>();
        o.operation_cost = value_or(oj, "operation_cost", 0.0);
        o.downtime_cost = value_or(oj, "downtime_cost", 0.0);
        o.repair_cost = value_or(oj, "repair_cost", 0.0);
        slot.options.push_back(o);
      }
      c.slots.push_back(std::move(slot));
    }
    c.budget = doc.at("budget").get<double>();
    for (const auto& kj : doc.at("scenarios")) {
      ReliabilityScenario s;
      s.probability = kj.at("probability").get<double>();
      s.discount = kj.at("discount").get<double>();
      s.failure_prob = kj.at("failure_prob").get<std::vector<double>>();
      s.repair_prob = kj.at("repair_prob").get<std::vector<double>>();
      s.repair_cost_factor = value_or(kj, "repair_cost_factor", 1.0);
      c.scenarios.push_back(std::move(s));
    }
    c.caps = parse_caps(doc);
    return c;
  });
}

// ------------------------------------------------------------------ inventory

DesignMdpInstance build_inventory_instance(const InventoryConfig& config) {
  const std::size_t R = config.locations.size();
  std::vector<std::string> bad;
  if (R == 0) bad.push_back("inventory config has no locations");
  if (config.select < 0 || static_cast<std::size_t>(config.select) > R)
    bad.push_back("select must lie in [0, number of locations]");
  for (std::size_t i = 0; i < R; ++i)
    if (config.locations[i].capacity < 0) bad.push_back(idx("locations", i) + ".capacity is negative");
  if (config.scenarios.empty()) bad.push_back("inventory config has no scenarios");
  for (std::size_t k = 0; k < config.scenarios.size(); ++k) {
    const auto& sc = config.scenarios[k];
    const std::string where = idx("scenarios", k);
    if (sc.locations.size() != R) {
      bad.push_back(where + " describes " + std::to_string(sc.locations.size()) + " locations, expected " +
                    std::to_string(R));
      continue;
    }
    for (std::size_t i = 0; i < R; ++i) {
      const auto& loc = sc.locations[i];
      const std::string lw = where + idx(".locations", i);
      const std::size_t D = loc.demand_levels.size();
      if (D == 0) bad.push_back(lw + " has no demand levels");
      for (int dl : loc.demand_levels)
        if (dl < 0) bad.push_back(lw + " has a negative demand level");
      if (loc.initial_demand.size() != D) bad.push_back(lw + ".initial_demand length differs from the demand levels");
      if (loc.demand_transition.size() != D) bad.push_back(lw + ".demand_transition must be square over demand levels");
      for (const auto& row : loc.demand_transition)
        if (row.size() != D) bad.push_back(lw + ".demand_transition must be square over demand levels");
    }
  }
  throw_if(bad);

  const std::size_t nu = config.initial_inventory ? R : 0;
  const std::size_t n = nu + R;
  auto xcol = [&](std::size_t i) { return nu + i; };

  DesignSpace::Data space;
  space.n1 = nu;
  space.n2 = R;
  std::vector<double> design_cost(n, 0.0);
  for (std::size_t i = 0; i < nu; ++i) {
    space.bounds.push_back({0.0, static_cast<double>(config.locations[i].capacity)});
    space.integrality.push_back(VarKind::Continuous);
    design_cost[i] = config.locations[i].initial_unit_cost;
  }
  for (std::size_t i = 0; i < R; ++i) {
    space.bounds.push_back({0.0, 1.0});
    space.integrality.push_back(VarKind::Binary);
    design_cost[xcol(i)] = config.locations[i].startup_cost;
  }
  auto pick = make_row(n, Relation::Equal, config.select, "select");
  for (std::size_t i = 0; i < R; ++i) pick.coeffs[xcol(i)] = 1.0;
  space.constraints.push_back(std::move(pick));
  for (std::size_t i = 0; i < nu; ++i) {
    auto row = make_row(n, Relation::LessEqual, 0.0, idx("initial_inventory", i));
    row.coeffs[i] = 1.0;
    row.coeffs[xcol(i)] = -static_cast<double>(config.locations[i].capacity);
    space.constraints.push_back(std::move(row));
  }

  std::vector<ScenarioMdp> scenarios;
  for (const auto& sc : config.scenarios) {
    // Per-location local state = inventory * D_i + previous demand level.
    std::vector<int> state_radix(R), action_radix(R);
    std::vector<std::size_t> state_sizes(R), action_sizes(R);
    for (std::size_t i = 0; i < R; ++i) {
      const int m = config.locations[i].capacity;
      state_radix[i] = (m + 1) * static_cast<int>(sc.locations[i].demand_levels.size());
      action_radix[i] = m + 1;
      state_sizes[i] = state_radix[i];
      action_sizes[i] = action_radix[i];
    }
    const std::size_t S = capped_product(state_sizes, config.caps.max_states, "number of states");
    const std::size_t A = capped_product(action_sizes, config.caps.max_state_actions, "number of actions");
    check_state_actions(S, A, config.caps);

    ScenarioMdp::Data d;
    d.num_states = static_cast<int>(S);
    d.num_actions = static_cast<int>(A);
    d.discount = sc.discount;
    d.probability = sc.probability;
    d.initial_dist.assign(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const auto local = decode(s, state_radix);
      double p = 1.0;
      for (std::size_t i = 0; i < R; ++i) {
        const int D = static_cast<int>(sc.locations[i].demand_levels.size());
        if (local[i] / D != 0) p = 0.0;
        else p *= sc.locations[i].initial_demand[local[i] % D];
      }
      d.initial_dist[s] = p;
    }

    d.transition.assign(S, std::vector<std::vector<double>>(A));
    d.cost.assign(S, std::vector<AffineCost>(A));
    for (std::size_t s = 0; s < S; ++s) {
      const auto local = decode(s, state_radix);
      for (std::size_t a = 0; a < A; ++a) {
        const auto order = decode(a, action_radix);
        AffineCost& cost = d.cost[s][a];
        cost.f.assign(n, 0.0);
        // Per-location distribution over the next local state.
        std::vector<std::vector<std::pair<int, double>>> next_local(R);
        for (std::size_t i = 0; i < R; ++i) {
          const auto& loc = sc.locations[i];
          const int m = config.locations[i].capacity;
          const int D = static_cast<int>(loc.demand_levels.size());
          const int inv = local[i] / D;
          const int level = local[i] % D;
          const int q = order[i];
          const int stocked = inv + q;
          const int usable = std::min(stocked, m);
          double fx = loc.fixed_cost + (loc.order_cost - loc.order_penalty) * q;
          double g = loc.order_penalty * q;
          const double over = stocked > m ? 1.0 : 0.0;
          const double any = stocked > 0 ? 1.0 : 0.0;
          const double held = inv > 0 ? 1.0 : 0.0;
          fx += config.overflow_penalty * (over - any) - config.capacity_penalty * held;
          g += config.overflow_penalty * any + config.capacity_penalty * held;
          for (int nl = 0; nl < D; ++nl) {
            const double p = loc.demand_transition[level][nl];
            if (p == 0.0) continue;
            const int demand = loc.demand_levels[nl];
            const int sold = std::min(usable, demand);
            const int left = usable - sold;
            const int lost = demand - sold;
            fx += p * (loc.shortage_cost * lost - loc.revenue * sold);
            g += p * loc.holding_cost * left;
            next_local[i].push_back({left * D + nl, p});
          }
          cost.f[xcol(i)] = fx;
          cost.g += g;
        }
        auto& row = d.transition[s][a];
        row.assign(S, 0.0);
        std::vector<std::size_t> pos(R, 0);
        std::vector<int> digits(R);
        while (true) {
          double p = 1.0;
          for (std::size_t i = 0; i < R; ++i) {
            digits[i] = next_local[i][pos[i]].first;
            p *= next_local[i][pos[i]].second;
          }
          row[encode(digits, state_radix)] += p;
          std::size_t i = 0;
          while (i < R && ++pos[i] == next_local[i].size()) pos[i++] = 0;
          if (i == R) break;
        }
      }
    }
    scenarios.emplace_back(std::move(d));
  }
  return DesignMdpInstance(DesignSpace(std::move(space)), std::move(design_cost), std::move(scenarios));
}

InventoryConfig parse_inventory_config(std::string_view json_text) {
  return parse_guarded(json_text, [](const json& doc) {
    InventoryConfig c;
    for (const auto& lj : doc.at("locations")) {
      InventoryLocation loc;
      loc.startup_cost = lj.at("startup_cost").get<double>();
      loc.capacity = lj.at("capacity").get<int>();
      loc.initial_unit_cost = value_or(lj, "initial_unit_cost", 0.0);
      c.locations.push_back(loc);
    }
    c.select = doc.at("select").get<int>();
    c.initial_inventory = value_or(doc, "initial_inventory", false);
    c.capacity_penalty = value_or(doc, "capacity_penalty", c.capacity_penalty);
    c.overflow_penalty = value_or(doc, "overflow_penalty", c.overflow_penalty);
    for (const auto& kj : doc.at("scenarios")) {
      InventoryScenario s;
      s.probability = kj.at("probability").get<double>();
      s.discount = kj.at("discount").get<double>();
      for (const auto& lj : kj.at("locations")) {
        InventoryLocationScenario l;
        l.demand_levels = lj.at("demand_levels").get<std::vector<int>>();
        l.demand_transition = lj.at("demand_transition").get<std::vector<std::vector<double>>>();
        l.initial_demand = lj.at("initial_demand").get<std::vector<double>>();
        l.order_cost = value_or(lj, "order_cost", 0.0);
        l.holding_cost = value_or(lj, "holding_cost", 0.0);
        l.shortage_cost = value_or(lj, "shortage_cost", 0.0);
        l.revenue = value_or(lj, "revenue", 0.0);
        l.fixed_cost = value_or(lj, "fixed_cost", 0.0);
        l.order_penalty = value_or(lj, "order_penalty", l.order_penalty);
        s.locations.push_back(std::move(l));
      }
      c.scenarios.push_back(std::move(s));
    }
    c.caps = parse_caps(doc);
    return c;
  });
}

// ---------------------------------------------------------------------- queue

std::vector<double> arrival_distribution(ArrivalModel model, double rate, int capacity) {
  if (capacity < 0) throw InvariantError({"arrival capacity must be non-negative"});
  if (!(rate >= 0.0)) throw InvariantError({"arrival rate must be non-negative"});
  std::vector<double> p(static_cast<std::size_t>(capacity) + 1, 0.0);
  if (model == ArrivalModel::Bernoulli) {
    const double one = std::min(rate, 1.0);
    if (capacity == 0) {
      p[0] = 1.0;
    } else {
      p[0] = 1.0 - one;
      p[1] = one;
    }
    return p;
  }
  if (model != ArrivalModel::Poisson) throw InvariantError({"categorical arrivals need explicit probabilities"});
  double term = std::exp(-rate);
  double mass = 0.0;
  for (int k = 0; k < capacity; ++k) {
    p[k] = term;
    mass += term;
    term *= rate / (k + 1);
  }
  p[capacity] = std::max(0.0, 1.0 - mass);
  return p;
}

DesignMdpInstance build_queue_instance(const QueueConfig& config) {
  const std::size_t I = config.servers.size();
  const std::size_t J = config.capacity.size();
  std::vector<std::string> bad;
  if (I == 0) bad.push_back("queue config has no server types");
  if (J == 0) bad.push_back("queue config has no customer types");
  if (config.total_limit < 0) bad.push_back("total_limit is negative");
  for (std::size_t i = 0; i < I; ++i)
    if (config.servers[i].limit < 0) bad.push_back(idx("servers", i) + ".limit is negative");
  for (std::size_t j = 0; j < J; ++j)
    if (config.capacity[j] < 1) bad.push_back(idx("capacity", j) + " must be at least 1");
  if (!config.waiting_cost.empty() && config.waiting_cost.size() != J)
    bad.push_back("waiting_cost length differs from the number of customer types");
  if (config.scenarios.empty()) bad.push_back("queue config has no scenarios");
  for (std::size_t k = 0; k < config.scenarios.size(); ++k) {
    const auto& sc = config.scenarios[k];
    const std::string where = idx("scenarios", k);
    auto matrix_ok = [&](const std::vector<std::vector<double>>& m, const char* name) {
      bool ok = m.size() == I;
      for (const auto& row : m) ok = ok && row.size() == J;
      if (!ok) bad.push_back(where + "." + name + " must be servers x customer types");
    };
    matrix_ok(sc.success_prob, "success_prob");
    matrix_ok(sc.reward, "reward");
    if (sc.operating_cost.size() != I) bad.push_back(where + ".operating_cost length differs from the server types");
    if (sc.arrival_model == ArrivalModel::Categorical) {
      if (sc.arrival_probs.size() != J) bad.push_back(where + ".arrival_probs needs one distribution per customer type");
      for (std::size_t j = 0; j < std::min(J, sc.arrival_probs.size()); ++j)
        if (sc.arrival_probs[j].size() != static_cast<std::size_t>(config.capacity[j]) + 1)
          bad.push_back(where + idx(".arrival_probs", j) + " must cover 0..capacity");
    } else if (sc.arrival_rate.size() != J) {
      bad.push_back(where + ".arrival_rate length differs from the customer types");
    }
  }
  throw_if(bad);

  std::vector<std::size_t> y_offset(I);
  std::size_t n = I;
  for (std::size_t i = 0; i < I; ++i) {
    y_offset[i] = n;
    n += static_cast<std::size_t>(config.servers[i].limit);
  }
  auto ycol = [&](std::size_t i, int l) { return y_offset[i] + static_cast<std::size_t>(l - 1); };

  DesignSpace::Data space;
  space.n2 = n;
  std::vector<double> design_cost(n, 0.0);
  for (std::size_t i = 0; i < I; ++i) {
    space.bounds.push_back({0.0, static_cast<double>(config.servers[i].limit)});
    space.integrality.push_back(VarKind::Integer);
    design_cost[i] = config.servers[i].recruit_cost;
  }
  for (std::size_t c = I; c < n; ++c) {
    space.bounds.push_back({0.0, 1.0});
    space.integrality.push_back(VarKind::Binary);
  }
  for (std::size_t i = 0; i < I; ++i) {
    auto link = make_row(n, Relation::Equal, 0.0, idx("unary_link", i));
    link.coeffs[i] = 1.0;
    for (int l = 1; l <= config.servers[i].limit; ++l) link.coeffs[ycol(i, l)] = -1.0;
    space.constraints.push_back(std::move(link));
    for (int l = 1; l < config.servers[i].limit; ++l) {
      auto order = make_row(n, Relation::LessEqual, 0.0, idx("unary_order", i));
      order.coeffs[ycol(i, l + 1)] = 1.0;
      order.coeffs[ycol(i, l)] = -1.0;
      space.constraints.push_back(std::move(order));
    }
    auto limit = make_row(n, Relation::LessEqual, config.servers[i].limit, idx("type_limit", i));
    limit.coeffs[i] = 1.0;
    space.constraints.push_back(std::move(limit));
  }
  auto total = make_row(n, Relation::LessEqual, config.total_limit, "total_limit");
  for (std::size_t i = 0; i < I; ++i) total.coeffs[i] = 1.0;
  space.constraints.push_back(std::move(total));

  std::vector<int> state_radix(J), action_radix(I * J);
  std::vector<std::size_t> state_sizes(J), action_sizes(I * J);
  for (std::size_t j = 0; j < J; ++j) state_sizes[j] = state_radix[j] = config.capacity[j] + 1;
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) action_sizes[i * J + j] = action_radix[i * J + j] = config.servers[i].limit + 1;
  const std::size_t S = capped_product(state_sizes, config.caps.max_states, "number of states");
  const std::size_t A = capped_product(action_sizes, config.caps.max_state_actions, "number of actions");
  check_state_actions(S, A, config.caps);

  std::vector<ScenarioMdp> scenarios;
  for (const auto& sc : config.scenarios) {
    std::vector<std::vector<double>> arrivals(J);
    for (std::size_t j = 0; j < J; ++j)
      arrivals[j] = sc.arrival_model == ArrivalModel::Categorical
                        ? sc.arrival_probs[j]
                        : arrival_distribution(sc.arrival_model, sc.arrival_rate[j], config.capacity[j]);

    ScenarioMdp::Data d;
    d.num_states = static_cast<int>(S);
    d.num_actions = static_cast<int>(A);
    d.discount = sc.discount;
    d.probability = sc.probability;
    d.initial_dist.assign(S, 0.0);
    d.initial_dist[0] = 1.0;
    d.transition.assign(S, std::vector<std::vector<double>>(A));
    d.cost.assign(S, std::vector<AffineCost>(A));
    for (std::size_t s = 0; s < S; ++s) {
      const auto queue = decode(s, state_radix);
      for (std::size_t a = 0; a < A; ++a) {
        const auto assign = decode(a, action_radix);
        AffineCost& cost = d.cost[s][a];
        cost.f.assign(n, 0.0);
        for (std::size_t i = 0; i < I; ++i) {
          cost.f[i] += sc.operating_cost[i];
          int used = 0;
          for (std::size_t j = 0; j < J; ++j) used += assign[i * J + j];
          if (used > config.servers[i].limit) {
            cost.g += config.mask_cost;
          } else if (used >= 1) {
            cost.g += config.mask_cost;
            cost.f[ycol(i, used)] -= config.mask_cost;
          }
          for (std::size_t j = 0; j < J; ++j) cost.g -= assign[i * J + j] * sc.success_prob[i][j] * sc.reward[i][j];
        }
        std::vector<int> remaining(J);
        for (std::size_t j = 0; j < J; ++j) {
          int served = 0;
          for (std::size_t i = 0; i < I; ++i) served += assign[i * J + j];
          if (served > queue[j]) cost.g += config.mask_cost;
          remaining[j] = queue[j] - std::min(served, queue[j]);
          if (!config.waiting_cost.empty()) cost.g += config.waiting_cost[j] * queue[j];
          for (std::size_t k = 0; k < arrivals[j].size(); ++k) {
            const int overflow = remaining[j] + static_cast<int>(k) - config.capacity[j];
            if (overflow > 0) cost.g += config.rejection_penalty * arrivals[j][k] * overflow;
          }
        }
        auto& row = d.transition[s][a];
        row.assign(S, 0.0);
        std::vector<std::size_t> k(J, 0);
        std::vector<int> next(J);
        while (true) {
          double p = 1.0;
          for (std::size_t j = 0; j < J; ++j) {
            next[j] = std::min(config.capacity[j], remaining[j] + static_cast<int>(k[j]));
            p *= arrivals[j][k[j]];
          }
          if (p != 0.0) row[encode(next, state_radix)] += p;
          std::size_t j = 0;
          while (j < J && ++k[j] == arrivals[j].size()) k[j++] = 0;
          if (j == J) break;
        }
      }
    }
    scenarios.emplace_back(std::move(d));
  }
  return DesignMdpInstance(DesignSpace(std::move(space)), std::move(design_cost), std::move(scenarios));
}

QueueConfig parse_queue_config(std::string_view json_text) {
  return parse_guarded(json_text, [](const json& doc) {
    QueueConfig c;
    for (const auto& sj : doc.at("servers")) {
      QueueServerType t;
      t.recruit_cost = sj.at("recruit_cost").get<double>();
      t.limit = sj.at("limit").get<int>();
      c.servers.push_back(t);
    }
    c.total_limit = doc.at("total_limit").get<int>();
    c.capacity = doc.at("capacity").get<std::vector<int>>();
    c.waiting_cost = value_or(doc, "waiting_cost", std::vector<double>{});
    c.rejection_penalty = value_or(doc, "rejection_penalty", 0.0);
    c.mask_cost = value_or(doc, "mask_cost", c.mask_cost);
    for (const auto& kj : doc.at("scenarios")) {
      QueueScenario s;
      s.probability = kj.at("probability").get<double>();
      s.discount = kj.at("discount").get<double>();
      s.success_prob = kj.at("success_prob").get<std::vector<std::vector<double>>>();
      s.reward = kj.at("reward").get<std::vector<std::vector<double>>>();
      s.operating_cost = kj.at("operating_cost").get<std::vector<double>>();
      const std::string model = value_or(kj, "arrival_model", std::string("poisson"));
      if (model == "poisson") s.arrival_model = ArrivalModel::Poisson;
      else if (model == "bernoulli") s.arrival_model = ArrivalModel::Bernoulli;
      else if (model == "categorical") s.arrival_model = ArrivalModel::Categorical;
      else throw InvariantError({"config: unknown arrival_model '" + model + "'"});
      s.arrival_rate = value_or(kj, "arrival_rate", std::vector<double>{});
      s.arrival_probs = value_or(kj, "arrival_probs", std::vector<std::vector<double>>{});
      c.scenarios.push_back(std::move(s));
    }
    c.caps = parse_caps(doc);
    return c;
  });
}

}  // namespace mdpdesign::app
