#pragma once

// Canonical JSON files.
//
// Instance (version 1):
//   {version, n1, n2, bounds: [[lo, hi], ...], integrality: ["continuous" |
//    "integer" | "binary", ...], constraints: [{coeffs, rel: "<=" | "=" | ">=",
//    rhs}], design_cost, scenarios: [{probability, discount, num_states,
//    num_actions, transition[s][a][s'], cost_f[s][a][n], cost_g[s][a],
//    initial_dist}]}
// An infinite bound is written as null.
//
// Solution (version 1):
//   {version, kind: "solution", method, bigm, status, x, objective,
//    design_cost, per_scenario: [{u, values, rule}], stats: {...}}

#include <string>
#include <string_view>

#include "mdpdesign/design.hpp"

namespace mdpdesign {

inline constexpr int kSchemaVersion = 1;

std::string instance_to_json(const DesignMdpInstance& instance);

/// Parses and validates an instance. Throws InvariantError listing every
/// schema and invariant violation found.
DesignMdpInstance instance_from_json(std::string_view text);

struct SolutionDocument {
  IntegratedSolution solution;
  std::string bigm;  // empty for the enumeration method
};

std::string solution_to_json(const IntegratedSolution& solution, std::string_view bigm = {});

/// Throws InvariantError on schema violations.
SolutionDocument solution_from_json(std::string_view text);

enum class DocumentKind { Instance, Solution };

/// Solution documents carry `"kind": "solution"`; anything else is read as an
/// instance. Throws InvariantError if the text is not a JSON object.
DocumentKind detect_document_kind(std::string_view text);

/// Writes leader.lp, follower_<k>.lp and manifest.json into `directory`
/// (created if missing). Returns the manifest path.
std::string write_bilevel_export(const DesignMdpInstance& instance, const std::string& directory);

/// Throws Error when the file cannot be read or written.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace mdpdesign
