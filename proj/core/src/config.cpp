#include "growth/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace growth {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

const char* step_rule_name(StepRule r) {
    return r == StepRule::EconomyAverage ? "economy_average" : "type_specific";
}

// One entry per key: how to read it and how to print it.
struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, Field>>;

template <class Get>
Field real_at(Get get) {
    return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = to_double(k, v); },
            [get](const RunConfig& c) { return fmt(get(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field integer_at(Get get, long long lo) {
    return {[get, lo](RunConfig& c, const std::string& k, const std::string& v) {
                const long long n = to_integer(k, v);
                if (n < lo) throw ConfigError(k, "must be >= " + std::to_string(lo));
                get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(n);
            },
            [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); }};
}

const Table& table() {
    static const Table t = [] {
        Table t;
        auto prim = [&](const char* name, double Primitives::*m) {
            t.emplace_back(name, real_at([m](RunConfig& c) -> double& { return c.primitives.*m; }));
        };
        prim("alpha", &Primitives::alpha);
        prim("beta", &Primitives::beta);
        prim("phi", &Primitives::phi);
        prim("varphi", &Primitives::varphi);
        prim("nu", &Primitives::nu);
        prim("mu", &Primitives::mu);
        prim("lambda", &Primitives::lambda);
        prim("eta", &Primitives::eta);
        prim("theta_al", &Primitives::theta_al);
        prim("theta_ah", &Primitives::theta_ah);
        prim("theta_b", &Primitives::theta_b);
        prim("theta_e", &Primitives::theta_e);
        prim("epsilon", &Primitives::epsilon);
        prim("gamma", &Primitives::gamma);
        prim("rho", &Primitives::rho);
        prim("vartheta", &Primitives::vartheta);
        prim("L_s", &Primitives::L_s);
        prim("varsigma", &Primitives::varsigma);

        t.emplace_back("policy.kind",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 try {
                                     c.policy.kind = parse_policy_kind(v);
                                 } catch (const DomainError& e) {
                                     throw ConfigError(k, e.what());
                                 }
                             },
                             [](const RunConfig& c) { return std::string(policy_kind_name(c.policy.kind)); }});
        t.emplace_back("policy.targets",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 try {
                                     c.policy.targets = parse_targets(v);
                                 } catch (const DomainError& e) {
                                     throw ConfigError(k, e.what());
                                 }
                             },
                             [](const RunConfig& c) { return targets_name(c.policy.targets); }});
        t.emplace_back("policy.s_inc", real_at([](RunConfig& c) -> double& { return c.policy.s_inc; }));
        t.emplace_back("policy.budget_share",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 if (v == "none") {
                                     c.policy.budget_share.reset();
                                 } else {
                                     c.policy.budget_share = to_double(k, v);
                                 }
                             },
                             [](const RunConfig& c) {
                                 return c.policy.budget_share ? fmt(*c.policy.budget_share)
                                                              : std::string("none");
                             }});
        t.emplace_back("policy.controls",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 if (v == "none") {
                                     c.policy.planner_controls.reset();
                                     return;
                                 }
                                 PlannerControls pc{};
                                 std::stringstream ss(v);
                                 std::string item;
                                 std::size_t n = 0;
                                 while (std::getline(ss, item, ',')) {
                                     if (n == 6) throw ConfigError(k, "expected 6 comma-separated values");
                                     pc[n++] = to_double(k, trim(item));
                                 }
                                 if (n != 6) throw ConfigError(k, "expected 6 comma-separated values");
                                 c.policy.planner_controls = pc;
                             },
                             [](const RunConfig& c) {
                                 if (!c.policy.planner_controls) return std::string("none");
                                 std::string out;
                                 for (double v : *c.policy.planner_controls)
                                     out += (out.empty() ? "" : ",") + fmt(v);
                                 return out;
                             }});
        t.emplace_back("policy.deduct_subsidy_cost",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 c.policy.deduct_subsidy_cost = to_bool(k, v);
                                 c.planner.deduct_subsidy_cost = c.policy.deduct_subsidy_cost;
                             },
                             [](const RunConfig& c) {
                                 return std::string(c.policy.deduct_subsidy_cost ? "true" : "false");
                             }});

        t.emplace_back("solver.tolerance", real_at([](RunConfig& c) -> double& { return c.solver.tolerance; }));
        t.emplace_back("solver.max_iterations",
                       integer_at([](RunConfig& c) -> int& { return c.solver.max_iterations; }, 1));
        t.emplace_back("solver.damping", real_at([](RunConfig& c) -> double& { return c.solver.damping; }));
        t.emplace_back("solver.acceleration",
                       integer_at([](RunConfig& c) -> int& { return c.solver.acceleration_memory; }, 0));
        t.emplace_back("grid.log_step",
                       real_at([](RunConfig& c) -> double& { return c.solver.dist.grid.log_step; }));
        t.emplace_back("grid.top_multiple",
                       real_at([](RunConfig& c) -> double& { return c.solver.dist.grid.top_multiple; }));
        t.emplace_back("grid.floor_divisor",
                       real_at([](RunConfig& c) -> double& { return c.solver.dist.grid.floor_divisor; }));
        t.emplace_back("grid.tail_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.solver.dist.grid.tail_tolerance; }));
        t.emplace_back("dist.tolerance", real_at([](RunConfig& c) -> double& { return c.solver.dist.tolerance; }));
        t.emplace_back("dist.max_iterations",
                       integer_at([](RunConfig& c) -> int& { return c.solver.dist.max_iterations; }, 1));
        t.emplace_back("dist.damping", real_at([](RunConfig& c) -> double& { return c.solver.dist.damping; }));
        t.emplace_back("dist.acceleration",
                       integer_at([](RunConfig& c) -> int& { return c.solver.dist.acceleration_memory; }, 0));

        t.emplace_back("planner.starts", integer_at([](RunConfig& c) -> int& { return c.planner.starts; }, 1));
        t.emplace_back("planner.max_evaluations",
                       integer_at([](RunConfig& c) -> int& { return c.planner.max_evaluations; }, 7));
        t.emplace_back("planner.simplex_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.planner.simplex_tolerance; }));
        t.emplace_back("planner.initial_step",
                       real_at([](RunConfig& c) -> double& { return c.planner.initial_step; }));
        t.emplace_back("planner.polish_evaluations",
                       integer_at([](RunConfig& c) -> int& { return c.planner.polish_evaluations; }, 0));
        t.emplace_back("planner.polish_step",
                       real_at([](RunConfig& c) -> double& { return c.planner.polish_step; }));
        t.emplace_back("planner.search_log_step",
                       real_at([](RunConfig& c) -> double& { return c.planner.search.dist.grid.log_step; }));
        t.emplace_back("planner.search_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.planner.search.tolerance; }));
        t.emplace_back("planner.search_max_iterations",
                       integer_at([](RunConfig& c) -> int& { return c.planner.search.max_iterations; }, 1));
        t.emplace_back("planner.subsidy_budget_share",
                       real_at([](RunConfig& c) -> double& { return c.planner_subsidy.budget_share; }));
        t.emplace_back("planner.subsidy_targets",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 try {
                                     c.planner_subsidy.targets = parse_targets(v);
                                 } catch (const DomainError& e) {
                                     throw ConfigError(k, e.what());
                                 }
                             },
                             [](const RunConfig& c) { return targets_name(c.planner_subsidy.targets); }});

        t.emplace_back("oracle.lines",
                       integer_at([](RunConfig& c) -> std::size_t& { return c.oracle.lines; }, 1));
        t.emplace_back("oracle.horizon", real_at([](RunConfig& c) -> double& { return c.oracle.horizon; }));
        t.emplace_back("oracle.dt", real_at([](RunConfig& c) -> double& { return c.oracle.dt; }));
        t.emplace_back("oracle.burn_in", real_at([](RunConfig& c) -> double& { return c.oracle.burn_in; }));
        t.emplace_back("oracle.snapshots",
                       integer_at([](RunConfig& c) -> int& { return c.oracle.snapshots; }, 1));
        t.emplace_back("oracle.step_rule",
                       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                 if (v == "economy_average") {
                                     c.oracle.step_rule = StepRule::EconomyAverage;
                                 } else if (v == "type_specific") {
                                     c.oracle.step_rule = StepRule::TypeSpecific;
                                 } else {
                                     throw ConfigError(k, "expected economy_average or type_specific");
                                 }
                             },
                             [](const RunConfig& c) { return std::string(step_rule_name(c.oracle.step_rule)); }});
        t.emplace_back("oracle.share_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.oracle.share_tolerance; }));
        t.emplace_back("oracle.ks_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.oracle.ks_tolerance; }));
        t.emplace_back("oracle.growth_tolerance",
                       real_at([](RunConfig& c) -> double& { return c.oracle.growth_tolerance; }));

        t.emplace_back("seed", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                         std::uint64_t s = 0;
                                         const auto* end = v.data() + v.size();
                                         const auto r = std::from_chars(v.data(), end, s);
                                         if (r.ec != std::errc() || r.ptr != end)
                                             throw ConfigError(k, "expected an unsigned integer, got '" + v + "'");
                                         c.seed = s;
                                     },
                                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        t.emplace_back("workers", integer_at([](RunConfig& c) -> int& { return c.workers; }, 1));
        return t;
    }();
    return t;
}

// Maps a Primitives::validate message back to the key it names.
std::string key_in_message(const std::string& msg) {
    std::string best;
    for (const auto& [key, field] : table()) {
        if (key.find('.') != std::string::npos) continue;
        const auto pos = msg.find(key);
        if (pos == std::string::npos) continue;
        const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(msg[pos - 1]));
        const std::size_t after = pos + key.size();
        const bool right = after >= msg.size() ||
                           !(std::isalnum(static_cast<unsigned char>(msg[after])) || msg[after] == '_');
        if (left && right && key.size() > best.size()) best = key;
    }
    return best;
}

void validate(RunConfig& c) {
    try {
        c.primitives.validate();
    } catch (const DomainError& e) {
        throw ConfigError(key_in_message(e.what()), e.what());
    }
    c.policy.varsigma = c.primitives.varsigma;
    try {
        c.policy.validate();
    } catch (const DomainError& e) {
        throw ConfigError("policy", e.what());
    }
    auto positive = [](const char* key, double v) {
        if (!(v > 0)) throw ConfigError(key, "must be > 0");
    };
    positive("solver.tolerance", c.solver.tolerance);
    positive("grid.log_step", c.solver.dist.grid.log_step);
    positive("grid.top_multiple", c.solver.dist.grid.top_multiple);
    positive("grid.floor_divisor", c.solver.dist.grid.floor_divisor);
    positive("grid.tail_tolerance", c.solver.dist.grid.tail_tolerance);
    positive("dist.tolerance", c.solver.dist.tolerance);
    positive("planner.simplex_tolerance", c.planner.simplex_tolerance);
    positive("planner.initial_step", c.planner.initial_step);
    positive("planner.polish_step", c.planner.polish_step);
    positive("planner.search_log_step", c.planner.search.dist.grid.log_step);
    positive("planner.search_tolerance", c.planner.search.tolerance);
    positive("oracle.horizon", c.oracle.horizon);
    positive("oracle.dt", c.oracle.dt);
    positive("oracle.share_tolerance", c.oracle.share_tolerance);
    positive("oracle.ks_tolerance", c.oracle.ks_tolerance);
    positive("oracle.growth_tolerance", c.oracle.growth_tolerance);
    if (!(c.solver.damping > 0 && c.solver.damping <= 1)) throw ConfigError("solver.damping", "must lie in (0,1]");
    if (!(c.solver.dist.damping > 0 && c.solver.dist.damping <= 1))
        throw ConfigError("dist.damping", "must lie in (0,1]");
    if (c.oracle.burn_in < 0 || c.oracle.burn_in >= c.oracle.horizon)
        throw ConfigError("oracle.burn_in", "must lie in [0, oracle.horizon)");
    if (c.planner_subsidy.budget_share < 0)
        throw ConfigError("planner.subsidy_budget_share", "must be >= 0");
    c.planner.solver = c.solver;
    c.planner.seed = c.seed;
    c.planner.workers = c.workers;
}

}  // namespace

PolicyKind parse_policy_kind(const std::string& s) {
    if (s == "none") return PolicyKind::None;
    if (s == "subsidy") return PolicyKind::IncumbentSubsidy;
    if (s == "planner") return PolicyKind::Planner;
    if (s == "planner_subsidy") return PolicyKind::PlannerWithSubsidy;
    throw DomainError("unknown policy kind '" + s + "' (none, subsidy, planner, planner_subsidy)");
}

const char* policy_kind_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::None: return "none";
        case PolicyKind::IncumbentSubsidy: return "subsidy";
        case PolicyKind::Planner: return "planner";
        case PolicyKind::PlannerWithSubsidy: return "planner_subsidy";
    }
    return "none";
}

TargetSet parse_targets(const std::string& s) {
    if (s == "all") return {true, true, true};
    if (s == "applied") return {true, true, false};
    if (s == "basic") return {false, false, true};
    if (s == "none") return {false, false, false};
    TargetSet t{false, false, false};
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        bool found = false;
        for (auto k : kAllTypes)
            if (item == type_name(k)) t[idx(k)] = found = true;
        if (!found) throw DomainError("unknown research type '" + item + "' (al, ah, b)");
    }
    return t;
}

std::string targets_name(const TargetSet& t) {
    if (t[0] && t[1] && t[2]) return "all";
    if (t[0] && t[1] && !t[2]) return "applied";
    if (!t[0] && !t[1] && t[2]) return "basic";
    std::string out;
    for (auto k : kAllTypes)
        if (t[idx(k)]) out += (out.empty() ? "" : ",") + std::string(type_name(k));
    return out.empty() ? "none" : out;
}

RunConfig parse_config(const std::string& text) {
    std::map<std::string, const Field*> by_key;
    for (const auto& [key, field] : table()) by_key[key] = &field;

    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw ConfigError(key, "unknown key");
        if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
        if (value.empty()) throw ConfigError(key, "missing value");
        it->second->set(cfg, key, value);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("", "cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, field] : table()) out += key + " = " + field.get(cfg) + "\n";
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace growth
