#pragma once

#include <optional>
#include <vector>

#include "growth/firm_value.hpp"
#include "growth/stationary_dist.hpp"

namespace growth {

// Innovation rates and exit thresholds imposed from outside (planner).
struct PinnedControls {
    PerType x{};
    PerType q_min{};
};

// What the equilibrium solve needs to know about a policy.
struct PolicyInputs {
    PerType subsidy{};                     // R&D cost share covered, per type
    std::optional<PinnedControls> pinned;  // planner controls, if any
    // With pinned rates: rescale the subsidy on `budget_targets` every
    // iteration so that its cost is this share of GDP.
    std::optional<double> budget_share;
    PerType budget_targets{};
};

struct SolverOptions {
    DistributionOptions dist;
    double tolerance = 1e-8;
    int max_iterations = 10000;
    double damping = 0.5;
    int acceleration_memory = 4;  // Anderson history length; 0 = damped iteration
};

// The eight fixed-point unknowns.
struct FixedPoint {
    double w = 1.9;
    PerType phi{0.55, 0.06, 0.002};
    PerType expected{0.7, 0.85, 0.8};
    double q_bar = 1.7;
};

struct EquilibriumState {
    FixedPoint vec;

    double x_e = 0.0;
    PerType x{};
    PerType omega{};
    PerType q_min{};
    PerType never_exit{};  // 1 where the threshold is 0 because the radicand is negative
    PerType tau_type{};
    double tau = 0.0;
    double g = 0.0;
    double r = 0.0;
    double xi = 0.0;
    double zeta = 0.0;
    double phi_np = 0.0;
    double rd_labor = 0.0;
    double rd_labor_ratio = 0.0;
    double labor_residual = 0.0;
    double subsidy_cost = 0.0;  // share of GDP
    PerType subsidy{};

    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;  // residual per outer iteration
    DistributionSet dist;

    Environment environment() const;
};

struct ConvergenceError : SolverError {
    std::vector<double> history;
    ConvergenceError(const std::string& what, std::vector<double> h)
        : SolverError(what), history(std::move(h)) {}
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double interest_rate(double g, const Primitives& p);

double unskilled_wage(double Q, const Primitives& p);

struct LaborBalance {
    double residual;
    double rd_labor;
    double rd_labor_ratio;
};

// Skilled labor used minus supply. R&D labor is measured at the true
// capacities: a subsidy changes who pays, not how much labor research takes.
LaborBalance skilled_labor_residual(const PerType& phi, const PerType& x, double x_e,
                                    const Primitives& p);

EquilibriumState solve_equilibrium(const Primitives& p, const PolicyInputs& policy = {},
                                   const SolverOptions& opt = {},
                                   const std::optional<FixedPoint>& start = std::nullopt);

struct WelfareReport {
    double u0 = 0.0;
    double g = 0.0;
    double c0_index = 0.0;     // Phi0^(1/(eps-1))
    double consumption = 0.0;  // c0_index net of subsidy cost
};

// With `deduct_cost`, the subsidy cost (share of GDP) is taken out of
// initial consumption as a lump sum.
WelfareReport welfare(const EquilibriumState& s, const Primitives& p, bool deduct_cost = false);

WelfareReport welfare_of(double active_mass, double g, double cost_share, const Primitives& p);

// sigma with U(sigma * C_candidate, g_candidate) = U(C_reference, g_reference).
double consumption_equivalent(const WelfareReport& candidate, const WelfareReport& reference,
                              const Primitives& p);

// 100 / sigma: above 100 when the candidate is preferred.
double welfare_index(const WelfareReport& candidate, const WelfareReport& reference,
                     const Primitives& p);

}  // namespace growth
