#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace growth {

// Thrown when an argument lies outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when the economy has no active mass or no inflow at all.
struct DegenerateEconomy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ResearchType { AppliedLow = 0, AppliedHigh = 1, Basic = 2 };

inline constexpr std::array<ResearchType, 3> kAllTypes = {
    ResearchType::AppliedLow, ResearchType::AppliedHigh, ResearchType::Basic};

inline constexpr std::size_t idx(ResearchType k) { return static_cast<std::size_t>(k); }

const char* type_name(ResearchType k);

// Per-type triple indexed by ResearchType.
using PerType = std::array<double, 3>;

struct Primitives {
    double alpha = 0.100;    // entrant draws the basic type
    double beta = 0.926;     // applied entrant draws the high type
    double phi = 0.216;      // management labor per product line
    double varphi = 0.037;   // exogenous destruction rate
    double nu = 0.206;       // high -> low applied transition
    double mu = 0.116;       // basic -> low applied cool-down
    double lambda = 0.132;   // applied step without spillovers
    double eta = 0.219;      // basic step
    double theta_al = 1.391;
    double theta_ah = 1.751;
    double theta_b = 0.681;
    double theta_e = 0.024;
    // Not listed with the others; defaults are this repo's calibration.
    double epsilon = 2.9;
    double gamma = 0.5;
    double rho = 0.02;
    double vartheta = 2.0;
    double L_s = 0.1653;
    // Spillover weight on basic research in the spillover share.
    double varsigma = 1.0;

    double theta(ResearchType k) const;
    // Rate at which a line of type k leaves for the applied-low type.
    double transition_rate(ResearchType k) const;

    // Throws DomainError naming the first offending field.
    void validate() const;
};

double profit_constant(const Primitives& p);

double spillover_share(double phi_al, double phi_ah, double phi_b, double varsigma);

double applied_step(double xi, const Primitives& p);

// Step of an innovation by type k given the spillover share.
double innovation_step(ResearchType k, double xi, const Primitives& p);

double economy_step_average(double phi_al, double phi_ah, double phi_b, double xi,
                            const Primitives& p);

double rd_labor_demand(double x, double theta, const Primitives& p);

PerType entry_type_probabilities(const Primitives& p);

double subsidized_capacity(double theta, double s, const Primitives& p);

// (base/q)^e evaluated in log space; 0 when base <= 0 or the result underflows.
double pow_ratio(double base, double q, double e);

}  // namespace growth
