#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "growth/equilibrium.hpp"

namespace growth {

enum class PolicyKind { None, IncumbentSubsidy, Planner, PlannerWithSubsidy };

using TargetSet = std::array<bool, 3>;

// Planner control vector: x_al, x_ah, x_b, q_min_al, q_min_ah, q_min_b.
using PlannerControls = std::array<double, 6>;

struct PolicySpec {
    PolicyKind kind = PolicyKind::None;
    TargetSet targets{false, false, false};
    double s_inc = 0.0;         // used when budget_share is not set
    std::optional<double> budget_share;
    double varsigma = 1.0;
    std::optional<PlannerControls> planner_controls;
    // Planner objective net of subsidy cost.
    bool deduct_subsidy_cost = true;

    void validate() const;
};

PinnedControls to_pinned(const PlannerControls& c);
PlannerControls to_controls(const EquilibriumState& s);

double subsidy_cost(const EquilibriumState& s, const TargetSet& targets, double s_inc,
                    const Primitives& p);

struct CalibratedSubsidy {
    double s_inc = 0.0;
    EquilibriumState state;
    int solves = 0;
};

// Subsidy rate whose equilibrium cost equals `budget_share` of GDP.
CalibratedSubsidy calibrate_subsidy_rate(double budget_share, const TargetSet& targets,
                                         const Primitives& p, const SolverOptions& opt = {},
                                         const std::optional<FixedPoint>& start = std::nullopt);

struct PolicyOutcome {
    PolicySpec spec;
    double s_inc = 0.0;
    EquilibriumState state;
    WelfareReport report;          // gross of subsidy cost
    WelfareReport report_net;      // subsidy cost deducted from consumption
    double welfare_index = 100.0;
    double welfare_index_net = 100.0;
};

// Solves the policy and compares it with the no-policy equilibrium under
// the same primitives (varsigma included).
PolicyOutcome net_welfare(const PolicySpec& spec, const Primitives& p,
                          const SolverOptions& opt = {});

// Same, against a baseline that is already solved.
PolicyOutcome net_welfare(const PolicySpec& spec, const Primitives& p,
                          const EquilibriumState& baseline, const SolverOptions& opt = {});

struct PlannerSubsidy {
    TargetSet targets{false, false, true};
    double budget_share = 0.0025;
};

// Restricted equilibrium with rates and thresholds pinned; returns the
// welfare index relative to `reference` (net of subsidy cost when
// `deduct_cost`).
struct PlannerEvaluation {
    double welfare_index;
    EquilibriumState state;
    double s_inc;
};

PlannerEvaluation planner_objective(const PlannerControls& controls,
                                    const std::optional<PlannerSubsidy>& subsidy,
                                    const Primitives& p, const WelfareReport& reference,
                                    const SolverOptions& opt = {},
                                    const std::optional<FixedPoint>& start = std::nullopt,
                                    bool deduct_cost = false);

// Coarser grid, looser tolerance and a short iteration cap: cheap enough
// for thousands of objective evaluations.
SolverOptions coarse_search_options();

struct PlannerOptions {
    int starts = 8;
    int max_evaluations = 2000;   // per start
    double simplex_tolerance = 1e-4;
    double initial_step = 0.25;   // log units
    std::uint64_t seed = 7;
    int workers = 1;
    double log_lower = std::log(1e-4);
    double log_upper = std::log(10.0);
    bool deduct_subsidy_cost = true;
    SolverOptions search = coarse_search_options();  // used inside the search
    SolverOptions solver;                            // polish and final solve
    int polish_evaluations = 150;
    double polish_step = 0.05;                       // log units
};

struct TracePoint {
    int start;
    int evaluation;
    PlannerControls controls;
    double welfare_index;
};

struct PlannerResult {
    PlannerControls controls{};
    EquilibriumState state;
    WelfareReport report;
    double welfare_index = 0.0;
    double welfare_index_net = 0.0;
    double s_inc = 0.0;
    std::vector<TracePoint> trace;
    int feasible_starts = 0;
};

PlannerResult optimize_planner(const std::optional<PlannerSubsidy>& subsidy, const Primitives& p,
                               const EquilibriumState& market, const PlannerOptions& opt = {});

}  // namespace growth
