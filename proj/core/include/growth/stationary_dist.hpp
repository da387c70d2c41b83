#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "growth/model_core.hpp"

namespace growth {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double log_step = 1.0 / 800.0;  // spacing of the log lattice
    double top_multiple = 20.0;     // q_max as a multiple of the mean
    double floor_divisor = 10.0;    // q_lo = min threshold / floor_divisor
    double tail_tolerance = 1e-6;   // mass allowed above q_max / 2
};

struct DistributionOptions {
    GridSpec grid;
    double tolerance = 1e-12;  // inner fixed point on shares and mean
    int max_iterations = 5000;
    double damping = 0.5;
    int acceleration_memory = 3;  // Anderson history length; 0 = damped iteration
};

// Product-line measures on a productivity grid. Node 0 sits at q = 0 and
// collects the mass that drifts below the lattice.
struct DistributionSet {
    std::vector<double> grid;
    std::vector<double> mass;                     // overall, sums to 1
    std::array<std::vector<double>, 3> type_mass; // active lines per type
    std::vector<double> F;                        // overall CDF at the nodes
    std::array<std::vector<double>, 3> F_type;    // unnormalized active CDFs

    PerType phi{};
    double phi_np = 0.0;
    double q_bar = 0.0;
    PerType tau_type{};
    double tau = 0.0;
    double xi = 0.0;
    double zeta = 0.0;
    double g = 0.0;

    // Diagnostics.
    int iterations = 0;
    double inner_change = 0.0;
    double balance_residual = 0.0;   // sup-norm over the node balance equations
    PerType flow_residual{};         // integrated inflow - outflow per type
    PerType exit_flow{};             // drift through the threshold per unit time
    double upper_tail = 0.0;         // mass above q_max / 2
};

struct DistributionInputs {
    PerType x{};       // incumbent innovation rates
    double x_e = 0.0;  // entrant rate
    PerType q_min{};   // exit thresholds (0 = never exit)
};

// Starting point for the inner fixed point.
struct DistributionGuess {
    PerType phi{0.5, 0.05, 0.005};
    double q_bar = 1.7;
};

DistributionSet solve_distributions(const DistributionInputs& in, const Primitives& p,
                                    const DistributionGuess& guess = {},
                                    const DistributionOptions& opt = {});

double growth_rate(const DistributionSet& dist, double zeta);

// Integral of 1 - F over the grid with F constant between nodes.
double mean_relative_productivity(std::span<const double> grid, std::span<const double> F);

// Value the active index sum must take when Q = 1: (eps / (eps - 1))^(eps - 1).
double productivity_index_target(const Primitives& p);

// Log-lattice grid with the positive thresholds inserted as nodes.
std::vector<double> build_grid(const PerType& q_min, double q_bar, const GridSpec& spec);

}  // namespace growth
