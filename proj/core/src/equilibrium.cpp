#include "growth/equilibrium.hpp"

#include "mixing.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <optional>
#include <sstream>

namespace growth {

namespace {

struct Evaluation {
    PerType theta_eff{};
    PerType x{};
    PerType omega{};
    PerType q_min{};
    PerType never_exit{};
    double x_e = 0.0;
    DistributionSet dist;
    double r = 0.0;
    Environment env;
    PerType expected{};
};

PerType effective_capacities(const PolicyInputs& pol, const Primitives& p) {
    PerType th{};
    for (auto k : kAllTypes) th[idx(k)] = subsidized_capacity(p.theta(k), pol.subsidy[idx(k)], p);
    return th;
}

// Rates, thresholds, distributions and new expected values implied by `v`.
Evaluation evaluate(const FixedPoint& v, const PolicyInputs& pol, const Primitives& p,
                    const SolverOptions& opt) {
    Evaluation e;
    e.theta_eff = effective_capacities(pol, p);
    for (auto k : kAllTypes) {
        const std::size_t i = idx(k);
        if (pol.pinned) {
            e.x[i] = pol.pinned->x[i];
        } else {
            e.x[i] = optimal_innovation_rate(v.expected[i], e.theta_eff[i], v.w, p);
        }
        e.omega[i] = e.x[i] * v.expected[i] - v.w * rd_labor_demand(e.x[i], e.theta_eff[i], p);
        if (pol.pinned) {
            e.q_min[i] = pol.pinned->q_min[i];
        } else {
            e.q_min[i] = exit_threshold_value(e.omega[i], v.w, p);
            e.never_exit[i] = e.q_min[i] == 0.0 ? 1.0 : 0.0;
        }
    }
    e.x_e = entrant_rate(v.expected, v.w, p).x;

    e.dist = solve_distributions({e.x, e.x_e, e.q_min}, p, {v.phi, v.q_bar}, opt.dist);
    e.r = interest_rate(e.dist.g, p);
    e.env.w = v.w;
    e.env.r = e.r;
    e.env.tau = e.dist.tau;
    e.env.g = e.dist.g;
    e.env.q_bar = e.dist.q_bar;
    e.env.xi = e.dist.xi;
    e.env.omega = e.omega;
    e.env.q_min = e.q_min;
    for (auto k : kAllTypes) {
        const ValueCurve curve(k, e.env, p);
        // Values are nonnegative; rounding can leave -1e-13 when they collapse.
        e.expected[idx(k)] =
            std::max(0.0, expected_innovation_value(curve, e.dist.grid, e.dist.F, e.env, p));
    }
    return e;
}

// Wage at which skilled labor clears given expected values and shares;
// empty when demand exceeds supply at every wage.
std::optional<double> clearing_wage(double w0, const PerType& expected, const PerType& phi,
                                    const PolicyInputs& pol, const PerType& theta_eff,
                                    const Primitives& p) {
    auto excess = [&](double logw) {
        const double w = std::exp(logw);
        PerType x{};
        for (auto k : kAllTypes) {
            const std::size_t i = idx(k);
            x[i] = pol.pinned ? pol.pinned->x[i]
                              : optimal_innovation_rate(expected[i], theta_eff[i], w, p);
        }
        const double xe = entrant_rate(expected, w, p).x;
        return skilled_labor_residual(phi, x, xe, p).residual;
    };
    double lo = std::log(w0), hi = lo;
    double flo = excess(lo), fhi = flo;
    if (flo == 0.0) return w0;
    int guard = 0;
    if (flo > 0) {
        while (fhi > 0) {
            lo = hi;
            flo = fhi;
            hi += 1.0;
            fhi = excess(hi);
            if (++guard > 60) return std::nullopt;
        }
    } else {
        while (flo < 0) {
            hi = lo;
            fhi = flo;
            lo -= 1.0;
            flo = excess(lo);
            if (++guard > 200) throw SolverError("no wage clears skilled labor");
        }
    }
    boost::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-15 * (1 + std::abs(a)); };
    const auto br = boost::math::tools::toms748_solve(excess, lo, hi, flo, fhi, tol, iters);
    return std::exp(0.5 * (br.first + br.second));
}

constexpr int kStarvedLimit = 30;
constexpr int kAndersonBudget = 200;

// Iteration coordinates: log w, shares, expected values, log q_bar.
std::vector<double> pack(const FixedPoint& v) {
    return {std::log(v.w),      v.phi[0],      v.phi[1],      v.phi[2],
            v.expected[0],      v.expected[1], v.expected[2], std::log(v.q_bar)};
}

FixedPoint unpack(const std::vector<double>& z) {
    FixedPoint v;
    v.w = std::exp(z[0]);
    for (int i = 0; i < 3; ++i) {
        v.phi[i] = z[1 + i];
        v.expected[i] = z[4 + i];
    }
    v.q_bar = std::exp(z[7]);
    return v;
}

double rel_change(double a, double b) {
    const double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

double vector_change(const FixedPoint& a, const FixedPoint& b) {
    double m = std::max(rel_change(a.w, b.w), rel_change(a.q_bar, b.q_bar));
    for (int i = 0; i < 3; ++i) {
        m = std::max(m, rel_change(a.phi[i], b.phi[i]));
        m = std::max(m, rel_change(a.expected[i], b.expected[i]));
    }
    return m;
}

}  // namespace

Environment EquilibriumState::environment() const {
    Environment e;
    e.w = vec.w;
    e.r = r;
    e.tau = tau;
    e.g = g;
    e.q_bar = dist.q_bar;
    e.xi = xi;
    e.omega = omega;
    e.q_min = q_min;
    return e;
}

double interest_rate(double g, const Primitives& p) { return p.rho + p.vartheta * g; }

double unskilled_wage(double Q, const Primitives& p) {
    if (!(Q > 0)) throw DomainError("productivity index must be > 0");
    return (p.epsilon - 1) / p.epsilon * Q;
}

LaborBalance skilled_labor_residual(const PerType& phi, const PerType& x, double x_e,
                                    const Primitives& p) {
    double rd = rd_labor_demand(x_e, p.theta_e, p);
    double mgmt = 0.0;
    for (auto k : kAllTypes) {
        rd += phi[idx(k)] * rd_labor_demand(x[idx(k)], p.theta(k), p);
        mgmt += phi[idx(k)] * p.phi;
    }
    return {rd + mgmt - p.L_s, rd, rd / p.L_s};
}

EquilibriumState solve_equilibrium(const Primitives& p, const PolicyInputs& policy,
                                   const SolverOptions& opt,
                                   const std::optional<FixedPoint>& start) {
    p.validate();
    for (double s : policy.subsidy)
        if (s < 0 || s >= 1) throw DomainError("subsidy rate must lie in [0,1)");
    if (policy.pinned)
        for (auto k : kAllTypes)
            if (!(policy.pinned->x[idx(k)] >= 0) || !(policy.pinned->q_min[idx(k)] >= 0))
                throw DomainError("planner controls must be nonnegative");

    if (policy.budget_share && !policy.pinned)
        throw DomainError("budget targeting inside the solve requires pinned rates");

    FixedPoint v = start.value_or(FixedPoint{});
    PolicyInputs pol = policy;
    std::vector<double> history;
    int starved = 0;  // consecutive iterations with no clearing wage
    detail::AndersonMixer mixer(opt.acceleration_memory, opt.damping, [](const auto& z) {
        for (int i = 1; i < 7; ++i)
            if (z[i] < 0) return false;
        return z[1] + z[2] + z[3] <= 1.0;
    });
    for (int it = 0;; ++it) {
        if (pol.budget_share) {
            double base = 0.0;
            for (auto k : kAllTypes)
                base += pol.budget_targets[idx(k)] * v.w *
                        rd_labor_demand(pol.pinned->x[idx(k)], p.theta(k), p) * v.phi[idx(k)];
            const double s = base > 0 ? std::min(*pol.budget_share / base, 0.99) : 0.0;
            for (auto k : kAllTypes) pol.subsidy[idx(k)] = pol.budget_targets[idx(k)] > 0 ? s : 0.0;
        }
        Evaluation e = evaluate(v, pol, p, opt);
        FixedPoint next;
        next.phi = e.dist.phi;
        next.q_bar = e.dist.q_bar;
        next.expected = e.expected;
        const auto cleared = clearing_wage(v.w, next.expected, next.phi, pol, e.theta_eff, p);
        if (cleared) {
            starved = 0;
            next.w = *cleared;
        } else {
            // Demand exceeds supply even with entry priced out at this
            // iterate; keep raising the wage and let the shares adjust.
            if (++starved > kStarvedLimit)
                throw InfeasibleError("skilled labor demand exceeds supply at every wage");
            next.w = v.w * std::exp(1.0);
        }
        const double change = vector_change(v, next);
        history.push_back(change);

        if (change < opt.tolerance && cleared) {
            EquilibriumState s;
            s.vec = v;
            s.x_e = e.x_e;
            s.x = e.x;
            s.omega = e.omega;
            s.q_min = e.q_min;
            s.never_exit = e.never_exit;
            s.tau_type = e.dist.tau_type;
            s.tau = e.dist.tau;
            s.g = e.dist.g;
            s.r = e.r;
            s.xi = e.dist.xi;
            s.zeta = e.dist.zeta;
            s.phi_np = e.dist.phi_np;
            const LaborBalance lb = skilled_labor_residual(e.dist.phi, e.x, e.x_e, p);
            s.rd_labor = lb.rd_labor;
            s.rd_labor_ratio = lb.rd_labor_ratio;
            s.labor_residual = lb.residual;
            s.subsidy = pol.subsidy;
            double cost = 0.0;
            for (auto k : kAllTypes)
                cost += pol.subsidy[idx(k)] * v.w *
                        rd_labor_demand(e.x[idx(k)], p.theta(k), p) * e.dist.phi[idx(k)];
            s.subsidy_cost = cost;
            s.iterations = it + 1;
            s.residual = change;
            s.history = std::move(history);
            s.dist = std::move(e.dist);
            if (!(s.r > s.g)) throw SolverError("interest rate does not exceed growth");
            return s;
        }
        if (it + 1 >= opt.max_iterations || !std::isfinite(change)) {
            std::ostringstream msg;
            msg << "equilibrium did not converge after " << it + 1
                << " iterations; last residual " << change;
            throw ConvergenceError(msg.str(), std::move(history));
        }
        if (!cleared) mixer.reset();
        if (it + 1 == kAndersonBudget) mixer.disable();
        std::vector<double> z = pack(v), f = pack(next);
        for (std::size_t i = 0; i < z.size(); ++i) f[i] -= z[i];
        v = unpack(mixer.next(z, f));
    }
}

WelfareReport welfare_of(double active_mass, double g, double cost_share, const Primitives& p) {
    if (!(active_mass > 0)) throw DomainError("welfare: no active mass");
    const double th = p.vartheta;
    const double denom = p.rho - g * (1 - th);
    if (!(denom > 0)) throw DomainError("welfare integral diverges");
    WelfareReport w;
    w.g = g;
    w.c0_index = std::pow(active_mass, 1.0 / (p.epsilon - 1));
    w.consumption = w.c0_index * (1.0 - cost_share);
    if (!(w.consumption > 0)) throw DomainError("welfare: subsidy cost exceeds consumption");
    if (std::abs(th - 1.0) < 1e-12) {
        w.u0 = std::log(w.consumption) / p.rho + g / (p.rho * p.rho);
    } else {
        w.u0 = (std::pow(w.consumption, 1 - th) / denom - 1.0 / p.rho) / (1 - th);
    }
    return w;
}

WelfareReport welfare(const EquilibriumState& s, const Primitives& p, bool deduct_cost) {
    return welfare_of(s.vec.phi[0] + s.vec.phi[1] + s.vec.phi[2], s.g,
                      deduct_cost ? s.subsidy_cost : 0.0, p);
}

double consumption_equivalent(const WelfareReport& candidate, const WelfareReport& reference,
                              const Primitives& p) {
    const double th = p.vartheta;
    const double ratio = reference.consumption / candidate.consumption;
    if (std::abs(th - 1.0) < 1e-12)
        return ratio * std::exp((reference.g - candidate.g) / p.rho);
    const double dc = p.rho - candidate.g * (1 - th);
    const double dr = p.rho - reference.g * (1 - th);
    return ratio * std::pow(dc / dr, 1.0 / (1 - th));
}

double welfare_index(const WelfareReport& candidate, const WelfareReport& reference,
                     const Primitives& p) {
    return 100.0 / consumption_equivalent(candidate, reference, p);
}

}  // namespace growth
