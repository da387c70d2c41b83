#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "growth/mc_oracle.hpp"
#include "growth/policy.hpp"

namespace growth {

// A configuration problem tied to one key.
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string k, const std::string& what)
        : std::runtime_error(k.empty() ? what : "config key '" + k + "': " + what),
          key(std::move(k)) {}
};

struct RunConfig {
    Primitives primitives;
    PolicySpec policy;
    SolverOptions solver;
    PlannerOptions planner;
    PlannerSubsidy planner_subsidy;
    OracleSettings oracle;
    std::uint64_t seed = 7;
    int workers = 1;
};

// Flat `key = value` text; `#` starts a comment. Keys are the Primitives
// field names plus dotted policy/solver/grid/planner/oracle keys, `seed`
// and `workers`. Unknown, duplicate or malformed keys throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical text with every key, in a fixed order; parse_config of the
// result reproduces the configuration.
std::string to_text(const RunConfig& cfg);

// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

PolicyKind parse_policy_kind(const std::string& s);
const char* policy_kind_name(PolicyKind k);

// "all", "applied", "basic", or a comma list of al/ah/b.
TargetSet parse_targets(const std::string& s);
std::string targets_name(const TargetSet& t);

}  // namespace growth
