#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "growth/equilibrium.hpp"

namespace growth {

// Philox4x32-10 counter-based generator.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter block(Counter ctr, Key key);
};

// Uniform in (0, 1) from a 32-bit word.
inline double to_unit(std::uint32_t u) { return (static_cast<double>(u) + 0.5) * 0x1.0p-32; }

enum class StepRule {
    EconomyAverage,  // every innovation adds zeta * q_bar, as in the analytic measures
    TypeSpecific,    // the innovator's own step times q_bar
};

struct OracleSettings {
    std::size_t lines = 100000;
    double horizon = 200.0;  // years
    double dt = 0.01;
    double burn_in = 20.0;   // years before statistics are collected
    int snapshots = 19;      // evenly spaced over (burn_in, horizon]
    StepRule step_rule = StepRule::EconomyAverage;
    double share_tolerance = 0.02;   // absolute, per type
    double ks_tolerance = 0.03;
    double growth_tolerance = 0.15;  // relative
};

inline constexpr int kLinePartitions = 64;

struct PanelStats {
    PerType phi_hat{};          // mean active share per type over snapshots
    double phi_np_hat = 0.0;
    double q_bar_hat_emp = 0.0; // mean relative productivity over all lines
    double growth_emp = 0.0;    // slope of the log productivity index
    std::array<std::vector<double>, 3> samples;  // pooled sorted q_hat per type
    std::uint64_t innovations = 0;
    std::uint64_t reassignments = 0;
    bool bookkeeping_ok = true;  // innovations == reassignments at every step
    std::size_t steps = 0;
};

// Discrete-time panel under the rates, thresholds and shares of `state`.
// Lines start from the analytic measures by inverse-CDF sampling.
PanelStats simulate_panel(const EquilibriumState& state, const Primitives& p,
                          const OracleSettings& opt, std::uint64_t seed, int workers = 1);

// Samples `n` lines per type straight from the analytic measures.
PanelStats sample_from_analytic(const DistributionSet& dist, std::size_t n, std::uint64_t seed);

// Analytic type-k CDF conditional on being active, linear between nodes.
double analytic_type_cdf(const DistributionSet& dist, ResearchType k, double q);

double ks_distance(const std::vector<double>& sorted, const DistributionSet& dist, ResearchType k);

struct OracleReport {
    PerType share_delta{};  // empirical - analytic
    PerType ks{};
    double growth_rel_delta = 0.0;
    bool shares_ok = false;
    bool ks_ok = false;
    bool growth_ok = false;
    bool pass() const { return shares_ok && ks_ok && growth_ok; }
};

OracleReport compare_to_analytic(const PanelStats& stats, const DistributionSet& dist,
                                 const OracleSettings& opt);

}  // namespace growth
