#pragma once

#include <cmath>
#include <span>

#include "growth/model_core.hpp"

namespace growth {

struct Environment {
    double w = 1.0;       // normalized skilled wage
    double r = 0.06;
    double tau = 0.15;
    double g = 0.02;
    double q_bar = 1.0;
    double xi = 0.0;
    PerType omega{};      // R&D option values
    PerType q_min{};      // exit thresholds; 0 means the line never exits

    // Throws DomainError unless Psi = r + tau + varphi > 0 and g > 0.
    void validate(const Primitives& p) const;
};

// Closed-form per-good value of a type-k line. Coefficients are fixed at
// construction; evaluation is pure.
class ValueCurve {
public:
    ValueCurve(ResearchType k, const Environment& env, const Primitives& p);

    ResearchType type() const { return type_; }
    double threshold() const { return c_; }

    // Unclamped branch above the own threshold; 0 at and below it.
    double raw(double q) const;
    // max{0, raw}: the value the firm actually realizes.
    double operator()(double q) const;

private:
    double low_raw(double q) const;     // applied-low value, unclamped
    double low_shadow(double q) const;  // applied-low form with rate Psi + iota
    double tail(double q) const;        // particular part from the iota * value_al source

    ResearchType type_;
    double em1_;           // epsilon - 1
    double g_;
    double psi_;
    double iota_;
    double c_;             // own threshold
    double c_al_;
    double a0_, b0_;       // applied-low coefficients at rate Psi
    double a_, b_;         // own coefficients at rate Psi + iota
    double b_shadow_;      // applied-low constant at rate Psi + iota
    double k_;             // homogeneous coefficient fixing raw(c) = 0
};

double value_applied_low(double q, const Environment& env, const Primitives& p);

double value_transitioning(double q, ResearchType k, const Environment& env,
                           const Primitives& p);

struct Threshold {
    double q_min;
    bool never_exit;
};

Threshold exit_threshold(ResearchType k, const Environment& env, const Primitives& p);

// Threshold from the option value alone, without an Environment.
double exit_threshold_value(double omega, double w, const Primitives& p);

double optimal_innovation_rate(double expected_gain, double theta, double w,
                               const Primitives& p);

double rd_option_value(double expected_gain, double theta, double w, const Primitives& p);

// Stieltjes trapezoid of v(q + shift) against the CDF F sampled on `grid`.
// Mass at or below grid[0] is placed at grid[0].
template <class Fn>
double stieltjes_expectation(std::span<const double> grid, std::span<const double> F,
                             double shift, Fn&& v);

double expected_innovation_value(const ValueCurve& curve, std::span<const double> grid,
                                 std::span<const double> F, const Environment& env,
                                 const Primitives& p);

struct EntrantChoice {
    double expected_value;
    double x;
};

EntrantChoice entrant_rate(const PerType& expected_values, double w, const Primitives& p);

// ---------------------------------------------------------------------------

template <class Fn>
double stieltjes_expectation(std::span<const double> grid, std::span<const double> F,
                             double shift, Fn&& v) {
    if (grid.size() != F.size() || grid.empty())
        throw DomainError("grid and CDF size mismatch");
    const double top = F.back();
    if (!(std::abs(top - 1.0) < 1e-9)) throw DomainError("CDF is not normalized");
    double prev = v(grid[0] + shift);
    double acc = F[0] * prev;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = v(grid[i] + shift);
        acc += 0.5 * (F[i] - F[i - 1]) * (cur + prev);
        prev = cur;
    }
    return acc;
}

}  // namespace growth
