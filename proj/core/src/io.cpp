#include "mdpdesign/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mdpdesign/errors.hpp"
#include "mdpdesign/reformulation.hpp"

namespace mdpdesign {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

ojson bound_to_json(double b) { return std::isfinite(b) ? ojson(b) : ojson(nullptr); }

// Collects schema violations with a JSON-path-like location.
class Reader {
 public:
  std::vector<std::string> bad;

  void fail(const std::string& path, const std::string& what) { bad.push_back(path + ": " + what); }

  const json* field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      fail(path, std::string("missing field '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool number(const json* j, const std::string& path, double& out) {
    if (!j) return false;
    if (!j->is_number()) {
      fail(path, "expected a number");
      return false;
    }
    out = j->get<double>();
    return true;
  }

  bool count(const json* j, const std::string& path, std::size_t& out) {
    if (!j) return false;
    if (!j->is_number_integer() || j->get<long long>() < 0) {
      fail(path, "expected a non-negative integer");
      return false;
    }
    out = j->get<std::size_t>();
    return true;
  }

  bool array(const json* j, const std::string& path, std::size_t expected, bool check_len = true) {
    if (!j) return false;
    if (!j->is_array()) {
      fail(path, "expected an array");
      return false;
    }
    if (check_len && j->size() != expected) {
      fail(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(j->size()));
      return false;
    }
    return true;
  }

  bool numbers(const json* j, const std::string& path, std::size_t expected, std::vector<double>& out,
               bool check_len = true) {
    if (!array(j, path, expected, check_len)) return false;
    out.clear();
    bool ok = true;
    for (std::size_t i = 0; i < j->size(); ++i) {
      double v = 0.0;
      ok = number(&(*j)[i], path + "[" + std::to_string(i) + "]", v) && ok;
      out.push_back(v);
    }
    return ok;
  }
};

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

json parse_object(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvariantError({std::string("malformed JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw InvariantError({"top level: expected a JSON object"});
  return doc;
}

void check_version(Reader& r, const json& doc) {
  std::size_t version = 0;
  if (r.count(r.field(doc, "version", "top level"), "version", version) && version != kSchemaVersion)
    r.fail("version", "unsupported schema version " + std::to_string(version));
}

bool parse_relation(const std::string& s, Relation& rel) {
  if (s == "<=") rel = Relation::LessEqual;
  else if (s == "=") rel = Relation::Equal;
  else if (s == ">=") rel = Relation::GreaterEqual;
  else return false;
  return true;
}

bool parse_kind(const std::string& s, VarKind& kind) {
  if (s == "continuous") kind = VarKind::Continuous;
  else if (s == "integer") kind = VarKind::Integer;
  else if (s == "binary") kind = VarKind::Binary;
  else return false;
  return true;
}

bool parse_status(const std::string& s, SolveStatus& status) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded, SolveStatus::IterationLimit,
                  SolveStatus::NodeLimit}) {
    if (s == to_string(st)) {
      status = st;
      return true;
    }
  }
  return false;
}

bool parse_scenario(Reader& r, const json& sj, const std::string& path, std::size_t n, ScenarioMdp::Data& d) {
  const std::size_t before = r.bad.size();
  r.number(r.field(sj, "probability", path), path + ".probability", d.probability);
  r.number(r.field(sj, "discount", path), path + ".discount", d.discount);
  std::size_t S = 0, A = 0;
  const bool have_s = r.count(r.field(sj, "num_states", path), path + ".num_states", S);
  const bool have_a = r.count(r.field(sj, "num_actions", path), path + ".num_actions", A);
  if (!have_s || !have_a) return false;
  d.num_states = static_cast<int>(S);
  d.num_actions = static_cast<int>(A);

  const json* tr = r.field(sj, "transition", path);
  const json* cf = r.field(sj, "cost_f", path);
  const json* cg = r.field(sj, "cost_g", path);
  r.numbers(r.field(sj, "initial_dist", path), path + ".initial_dist", S, d.initial_dist);

  d.transition.assign(S, {});
  d.cost.assign(S, std::vector<AffineCost>(A));
  const bool shapes = r.array(tr, path + ".transition", S) && r.array(cf, path + ".cost_f", S) &&
                      r.array(cg, path + ".cost_g", S);
  if (shapes) {
    for (std::size_t s = 0; s < S; ++s) {
      const std::string ts = at(path + ".transition", s), fs = at(path + ".cost_f", s), gs = at(path + ".cost_g", s);
      std::vector<double> g_row;
      if (!r.array(&(*tr)[s], ts, A) || !r.array(&(*cf)[s], fs, A) || !r.numbers(&(*cg)[s], gs, A, g_row)) continue;
      d.transition[s].resize(A);
      for (std::size_t a = 0; a < A; ++a) {
        r.numbers(&(*tr)[s][a], at(ts, a), S, d.transition[s][a]);
        r.numbers(&(*cf)[s][a], at(fs, a), n, d.cost[s][a].f);
        d.cost[s][a].g = g_row[a];
      }
    }
  }
  if (r.bad.size() != before) return false;
  for (auto& v : ScenarioMdp::check(d)) r.fail(path, v);
  return r.bad.size() == before;
}

}  // namespace

std::string instance_to_json(const DesignMdpInstance& instance) {
  const auto& space = instance.design();
  ojson doc;
  doc["version"] = kSchemaVersion;
  doc["n1"] = space.n1();
  doc["n2"] = space.n2();
  ojson bounds = ojson::array();
  for (const auto& b : space.bounds()) bounds.push_back(ojson::array({bound_to_json(b.lower), bound_to_json(b.upper)}));
  doc["bounds"] = std::move(bounds);
  ojson kinds = ojson::array();
  for (auto k : space.integrality()) kinds.push_back(to_string(k));
  doc["integrality"] = std::move(kinds);
  ojson rows = ojson::array();
  for (const auto& row : space.constraints()) {
    ojson rj;
    rj["coeffs"] = row.coeffs;
    rj["rel"] = to_string(row.rel);
    rj["rhs"] = row.rhs;
    rows.push_back(std::move(rj));
  }
  doc["constraints"] = std::move(rows);
  doc["design_cost"] = instance.design_cost();
  ojson scenarios = ojson::array();
  for (const auto& mdp : instance.scenarios()) {
    const int S = mdp.num_states(), A = mdp.num_actions();
    ojson sj;
    sj["probability"] = mdp.probability();
    sj["discount"] = mdp.discount();
    sj["num_states"] = S;
    sj["num_actions"] = A;
    ojson tr = ojson::array(), cf = ojson::array(), cg = ojson::array();
    for (int s = 0; s < S; ++s) {
      ojson tr_s = ojson::array(), cf_s = ojson::array(), cg_s = ojson::array();
      for (int a = 0; a < A; ++a) {
        auto row = mdp.transition_row(s, a);
        tr_s.push_back(std::vector<double>(row.begin(), row.end()));
        cf_s.push_back(mdp.cost(s, a).f);
        cg_s.push_back(mdp.cost(s, a).g);
      }
      tr.push_back(std::move(tr_s));
      cf.push_back(std::move(cf_s));
      cg.push_back(std::move(cg_s));
    }
    sj["transition"] = std::move(tr);
    sj["cost_f"] = std::move(cf);
    sj["cost_g"] = std::move(cg);
    sj["initial_dist"] = mdp.initial_dist();
    scenarios.push_back(std::move(sj));
  }
  doc["scenarios"] = std::move(scenarios);
  return doc.dump() + "\n";
}

DesignMdpInstance instance_from_json(std::string_view text) {
  const json doc = parse_object(text);
  Reader r;
  check_version(r, doc);

  DesignSpace::Data space;
  r.count(r.field(doc, "n1", "top level"), "n1", space.n1);
  r.count(r.field(doc, "n2", "top level"), "n2", space.n2);
  const std::size_t n = space.n1 + space.n2;

  if (const json* bj = r.field(doc, "bounds", "top level"); r.array(bj, "bounds", n)) {
    for (std::size_t j = 0; j < n; ++j) {
      const json& pair = (*bj)[j];
      const std::string path = at("bounds", j);
      if (!pair.is_array() || pair.size() != 2) {
        r.fail(path, "expected [lower, upper]");
        continue;
      }
      VarBounds b;
      b.lower = pair[0].is_null() ? -kInfinity : 0.0;
      b.upper = pair[1].is_null() ? kInfinity : 0.0;
      if (!pair[0].is_null()) r.number(&pair[0], path + "[0]", b.lower);
      if (!pair[1].is_null()) r.number(&pair[1], path + "[1]", b.upper);
      space.bounds.push_back(b);
    }
  }
  if (const json* ij = r.field(doc, "integrality", "top level"); r.array(ij, "integrality", n)) {
    for (std::size_t j = 0; j < n; ++j) {
      VarKind kind = VarKind::Continuous;
      if (!(*ij)[j].is_string() || !parse_kind((*ij)[j].get<std::string>(), kind))
        r.fail(at("integrality", j), "expected \"continuous\", \"integer\" or \"binary\"");
      space.integrality.push_back(kind);
    }
  }
  if (const json* cj = r.field(doc, "constraints", "top level"); r.array(cj, "constraints", 0, false)) {
    for (std::size_t i = 0; i < cj->size(); ++i) {
      const std::string path = at("constraints", i);
      const json& rj = (*cj)[i];
      LinearRow row;
      r.numbers(r.field(rj, "coeffs", path), path + ".coeffs", n, row.coeffs);
      r.number(r.field(rj, "rhs", path), path + ".rhs", row.rhs);
      if (const json* rel = r.field(rj, "rel", path); rel && (!rel->is_string() || !parse_relation(rel->get<std::string>(), row.rel)))
        r.fail(path + ".rel", "expected \"<=\", \"=\" or \">=\"");
      space.constraints.push_back(std::move(row));
    }
  }
  std::vector<double> design_cost;
  r.numbers(r.field(doc, "design_cost", "top level"), "design_cost", n, design_cost);

  std::vector<ScenarioMdp::Data> scenario_data;
  bool scenarios_ok = true;
  if (const json* sj = r.field(doc, "scenarios", "top level"); r.array(sj, "scenarios", 0, false)) {
    for (std::size_t k = 0; k < sj->size(); ++k) {
      ScenarioMdp::Data d;
      scenarios_ok = parse_scenario(r, (*sj)[k], at("scenarios", k), n, d) && scenarios_ok;
      scenario_data.push_back(std::move(d));
    }
  } else {
    scenarios_ok = false;
  }
  if (!r.bad.empty()) throw InvariantError(std::move(r.bad));

  for (auto& v : DesignSpace::check(space)) r.fail("design", v);
  if (!r.bad.empty() || !scenarios_ok) throw InvariantError(std::move(r.bad));

  std::vector<ScenarioMdp> scenarios;
  for (auto& d : scenario_data) scenarios.emplace_back(std::move(d));
  DesignSpace design(std::move(space));
  if (auto bad = DesignMdpInstance::check(design, design_cost, scenarios); !bad.empty())
    throw InvariantError(std::move(bad));
  return DesignMdpInstance(std::move(design), std::move(design_cost), std::move(scenarios));
}

std::string solution_to_json(const IntegratedSolution& solution, std::string_view bigm) {
  ojson doc;
  doc["version"] = kSchemaVersion;
  doc["kind"] = "solution";
  doc["method"] = to_string(solution.method);
  doc["bigm"] = std::string(bigm);
  doc["status"] = to_string(solution.status);
  doc["x"] = solution.x;
  doc["objective"] = solution.objective;
  ojson per = ojson::array();
  for (const auto& o : solution.per_scenario) {
    ojson oj;
    oj["u"] = o.expected_cost;
    oj["values"] = o.value.values;
    oj["rule"] = o.rule.action_of;
    per.push_back(std::move(oj));
  }
  doc["per_scenario"] = std::move(per);
  ojson stats;
  stats["solve_ms"] = solution.stats.solve_ms;
  stats["nodes"] = solution.stats.nodes;
  stats["lp_iterations"] = solution.stats.lp_iterations;
  stats["designs_evaluated"] = solution.stats.designs_evaluated;
  stats["mip_objective"] = solution.stats.mip_objective;
  doc["stats"] = std::move(stats);
  return doc.dump() + "\n";
}

SolutionDocument solution_from_json(std::string_view text) {
  const json doc = parse_object(text);
  Reader r;
  check_version(r, doc);
  SolutionDocument out;
  auto& sol = out.solution;

  const json* method = r.field(doc, "method", "top level");
  if (method) {
    const std::string m = method->is_string() ? method->get<std::string>() : "";
    if (m == to_string(SolveMethod::Enumeration)) sol.method = SolveMethod::Enumeration;
    else if (m == to_string(SolveMethod::MipReformulation)) sol.method = SolveMethod::MipReformulation;
    else r.fail("method", "expected \"enumeration\" or \"mip_reformulation\"");
  }
  if (const json* b = r.field(doc, "bigm", "top level"); b) {
    if (b->is_string()) out.bigm = b->get<std::string>();
    else r.fail("bigm", "expected a string");
  }
  if (const json* st = r.field(doc, "status", "top level"); st && (!st->is_string() || !parse_status(st->get<std::string>(), sol.status)))
    r.fail("status", "unknown solve status");
  r.numbers(r.field(doc, "x", "top level"), "x", 0, sol.x, false);
  r.number(r.field(doc, "objective", "top level"), "objective", sol.objective);

  if (const json* pj = r.field(doc, "per_scenario", "top level"); r.array(pj, "per_scenario", 0, false)) {
    for (std::size_t k = 0; k < pj->size(); ++k) {
      const std::string path = at("per_scenario", k);
      const json& oj = (*pj)[k];
      ScenarioOutcome o;
      r.number(r.field(oj, "u", path), path + ".u", o.expected_cost);
      r.numbers(r.field(oj, "values", path), path + ".values", 0, o.value.values, false);
      if (const json* rule = r.field(oj, "rule", path); r.array(rule, path + ".rule", 0, false)) {
        for (std::size_t s = 0; s < rule->size(); ++s) {
          if (!(*rule)[s].is_number_integer() || (*rule)[s].get<long long>() < 0) {
            r.fail(at(path + ".rule", s), "expected a non-negative integer");
            continue;
          }
          o.rule.action_of.push_back((*rule)[s].get<int>());
        }
      }
      sol.per_scenario.push_back(std::move(o));
    }
  }
  if (const json* sj = r.field(doc, "stats", "top level"); sj) {
    r.number(r.field(*sj, "solve_ms", "stats"), "stats.solve_ms", sol.stats.solve_ms);
    r.number(r.field(*sj, "mip_objective", "stats"), "stats.mip_objective", sol.stats.mip_objective);
    std::size_t v = 0;
    if (r.count(r.field(*sj, "nodes", "stats"), "stats.nodes", v)) sol.stats.nodes = static_cast<std::int64_t>(v);
    if (r.count(r.field(*sj, "lp_iterations", "stats"), "stats.lp_iterations", v))
      sol.stats.lp_iterations = static_cast<std::int64_t>(v);
    if (r.count(r.field(*sj, "designs_evaluated", "stats"), "stats.designs_evaluated", v))
      sol.stats.designs_evaluated = static_cast<std::int64_t>(v);
  }
  if (!r.bad.empty()) throw InvariantError(std::move(r.bad));
  return out;
}

DocumentKind detect_document_kind(std::string_view text) {
  const json doc = parse_object(text);
  auto it = doc.find("kind");
  if (it != doc.end() && it->is_string() && it->get<std::string>() == "solution") return DocumentKind::Solution;
  return DocumentKind::Instance;
}

std::string write_bilevel_export(const DesignMdpInstance& instance, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create directory '" + directory + "': " + ec.message());
  const auto models = build_bilevel_models(instance);
  const fs::path dir(directory);
  write_text_file((dir / "leader.lp").string(), to_lp_format(models.leader));
  ojson manifest;
  manifest["version"] = kSchemaVersion;
  manifest["kind"] = "bilevel";
  manifest["leader"] = {{"file", "leader.lp"}, {"sense", "minimize"}};
  manifest["linking_variables"] = models.linking_variables;
  ojson followers = ojson::array();
  for (std::size_t k = 0; k < models.followers.size(); ++k) {
    const std::string file = "follower_" + std::to_string(k) + ".lp";
    write_text_file((dir / file).string(), to_lp_format(models.followers[k]));
    ojson fj;
    fj["scenario"] = k;
    fj["file"] = file;
    fj["sense"] = "maximize";
    fj["probability"] = instance.scenarios()[k].probability();
    fj["variables"] = models.follower_variables[k];
    followers.push_back(std::move(fj));
  }
  manifest["followers"] = std::move(followers);
  const std::string path = (dir / "manifest.json").string();
  write_text_file(path, manifest.dump(1) + "\n");
  return path;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace mdpdesign
