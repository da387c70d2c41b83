#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "growth/firm_value.hpp"

namespace oracle {

using namespace growth;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Environment around the baseline scale with thresholds from the exit formula.
inline Environment random_environment(std::mt19937_64& rng, const Primitives& p) {
    Environment env;
    env.w = uniform(rng, 1.4, 2.6);
    env.r = uniform(rng, 0.03, 0.09);
    env.tau = uniform(rng, 0.08, 0.3);
    env.g = uniform(rng, 0.01, 0.045);
    env.q_bar = uniform(rng, 1.3, 2.1);
    env.xi = uniform(rng, 0.0, 0.1);
    for (auto k : kAllTypes) {
        env.omega[idx(k)] = uniform(rng, 0.0, 0.7) * env.w * p.phi;
        env.q_min[idx(k)] = exit_threshold(k, env, p).q_min;
    }
    return env;
}

// Integrates the per-good value equation in log productivity,
//   g dV/ds = Pi e^{(eps-1)s} + Omega - w phi - (Psi + iota) V + iota V_al,
// jointly with the applied-low equation that feeds the iota term. Each
// component is zero below its own threshold. Returns V_k at `points`
// (ascending, all >= the smaller threshold).
inline std::vector<double> integrate_value(ResearchType k, const Environment& env,
                                           const Primitives& p, const std::vector<double>& points) {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;  // {V_k, V_al}
    const double e = p.epsilon;
    const double pi = std::pow((e - 1) / e, e) / (e - 1);
    const double psi = env.r + env.tau + p.varphi;
    const double iota = p.transition_rate(k);
    const double fixed = env.w * p.phi;
    const double s_k = std::log(env.q_min[idx(k)]);
    const double s_al = std::log(env.q_min[idx(ResearchType::AppliedLow)]);
    const double om_k = env.omega[idx(k)];
    const double om_al = env.omega[idx(ResearchType::AppliedLow)];
    const bool own_low = k == ResearchType::AppliedLow;

    auto rhs = [&](const State& v, State& d, double s) {
        const double flow = pi * std::exp((e - 1) * s);
        d[1] = s >= s_al ? (flow + om_al - fixed - psi * v[1]) / env.g : 0.0;
        if (own_low) {
            d[0] = d[1];
        } else {
            d[0] = s >= s_k ? (flow + om_k - fixed - (psi + iota) * v[0] + iota * v[1]) / env.g : 0.0;
        }
    };
    std::vector<double> breaks{s_k, s_al};
    for (double q : points) breaks.push_back(std::log(q));
    std::sort(breaks.begin(), breaks.end());

    auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    State v{0.0, 0.0};
    double s = breaks.front();
    std::vector<double> out;
    std::size_t next = 0;
    for (double b : breaks) {
        if (b > s) {
            ode::integrate_adaptive(stepper, rhs, v, s, b, (b - s) / 50.0);
            s = b;
        }
        while (next < points.size() && std::log(points[next]) <= s + 1e-15) {
            out.push_back(points[next] <= env.q_min[idx(k)] ? 0.0 : v[0]);
            ++next;
        }
    }
    return out;
}

// Slope of a value branch at its own boundary, by a second-order one-sided
// difference of the closed form with the boundary moved to `c`.
inline double boundary_slope(ResearchType k, Environment env, const Primitives& p, double c) {
    env.q_min[idx(k)] = c;
    // Keep the applied-low boundary far above so that only the own-type
    // branch is involved.
    if (k != ResearchType::AppliedLow) env.q_min[idx(ResearchType::AppliedLow)] = 1e3 * c;
    const ValueCurve v(k, env, p);
    const double h = 1e-5 * c;
    return (4.0 * v.raw(c + h) - v.raw(c + 2 * h)) / (2 * h);
}

// Threshold at which the branch leaves zero with zero slope (smooth pasting),
// found by bracketing and toms748 over a wide range.
inline double smooth_pasting_root(ResearchType k, const Environment& env, const Primitives& p) {
    const double scale = std::pow(env.w * p.phi / 0.15, 1.0 / (p.epsilon - 1));
    double lo = 1e-3 * scale, hi = 1e2 * scale;
    auto f = [&](double c) { return boundary_slope(k, env, p, c); };
    const double flo = f(lo), fhi = f(hi);
    boost::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::abs(a); };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    g.back() = hi;
    return g;
}

}  // namespace oracle
