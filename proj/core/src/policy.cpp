#include "growth/policy.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <boost/math/tools/roots.hpp>
#include <limits>
#include <random>
#include <thread>

namespace growth {

void PolicySpec::validate() const {
    if (s_inc < 0 || s_inc >= 1) throw DomainError("policy.s_inc: must lie in [0,1)");
    if (budget_share && *budget_share < 0) throw DomainError("policy.budget_share: must be >= 0");
    if (varsigma < 1) throw DomainError("varsigma: must be >= 1");
    if (planner_controls)
        for (double c : *planner_controls)
            if (!(c > 0)) throw DomainError("policy.planner_controls: must be positive");
}

PinnedControls to_pinned(const PlannerControls& c) {
    return {{c[0], c[1], c[2]}, {c[3], c[4], c[5]}};
}

PlannerControls to_controls(const EquilibriumState& s) {
    return {s.x[0], s.x[1], s.x[2], s.q_min[0], s.q_min[1], s.q_min[2]};
}

double subsidy_cost(const EquilibriumState& s, const TargetSet& targets, double s_inc,
                    const Primitives& p) {
    double cost = 0.0;
    for (auto k : kAllTypes)
        if (targets[idx(k)])
            cost += s_inc * s.vec.w * rd_labor_demand(s.x[idx(k)], p.theta(k), p) *
                    s.dist.phi[idx(k)];
    return cost;
}

namespace {

PolicyInputs subsidy_inputs(const TargetSet& targets, double s_inc) {
    PolicyInputs in;
    for (auto k : kAllTypes) in.subsidy[idx(k)] = targets[idx(k)] ? s_inc : 0.0;
    return in;
}

}  // namespace

CalibratedSubsidy calibrate_subsidy_rate(double budget_share, const TargetSet& targets,
                                         const Primitives& p, const SolverOptions& opt,
                                         const std::optional<FixedPoint>& start) {
    if (budget_share < 0) throw DomainError("policy.budget_share: must be >= 0");
    CalibratedSubsidy out;
    const bool any = targets[0] || targets[1] || targets[2];
    if (budget_share == 0 || !any) {
        out.state = solve_equilibrium(p, {}, opt, start);
        out.solves = 1;
        return out;
    }
    std::optional<FixedPoint> warm = start;
    EquilibriumState last;
    double last_s = -1.0;
    auto excess = [&](double s) {
        last = solve_equilibrium(p, subsidy_inputs(targets, s), opt, warm);
        warm = last.vec;
        last_s = s;
        ++out.solves;
        return subsidy_cost(last, targets, s, p) - budget_share;
    };
    // Bracket: cost is zero at s = 0 and grows with s.
    double lo = 0.0, flo = -budget_share;
    double hi = 0.25, fhi = excess(hi);
    while (fhi < 0) {
        lo = hi;
        flo = fhi;
        hi = 1.0 - 0.5 * (1.0 - hi);
        if (hi > 1.0 - 1e-6) throw InfeasibleError("subsidy budget unreachable with s_inc < 1");
        fhi = excess(hi);
    }
    auto tol = [&](double a, double b) { return std::abs(a - b) < 1e-10; };
    boost::uintmax_t iters = 60;
    auto br = boost::math::tools::toms748_solve(
        [&](double s) {
            const double f = excess(s);
            return std::abs(f) < 1e-9 ? 0.0 : f;
        },
        lo, hi, flo, fhi, tol, iters);
    const double s = last_s;
    if (std::abs(subsidy_cost(last, targets, s, p) - budget_share) > 1e-6) {
        // The final evaluation may sit at the other end of the bracket.
        const double mid = 0.5 * (br.first + br.second);
        excess(mid);
    }
    out.s_inc = last_s;
    out.state = std::move(last);
    return out;
}

PolicyOutcome net_welfare(const PolicySpec& spec, const Primitives& p,
                          const EquilibriumState& baseline, const SolverOptions& opt) {
    spec.validate();
    Primitives q = p;
    q.varsigma = spec.varsigma;
    const WelfareReport ref = welfare(baseline, q);
    PolicyOutcome out;
    out.spec = spec;
    switch (spec.kind) {
        case PolicyKind::None:
            out.state = baseline;
            break;
        case PolicyKind::IncumbentSubsidy: {
            if (spec.budget_share) {
                CalibratedSubsidy c =
                    calibrate_subsidy_rate(*spec.budget_share, spec.targets, q, opt, baseline.vec);
                out.s_inc = c.s_inc;
                out.state = std::move(c.state);
            } else {
                out.s_inc = spec.s_inc;
                out.state = solve_equilibrium(q, subsidy_inputs(spec.targets, spec.s_inc), opt,
                                              baseline.vec);
            }
            break;
        }
        case PolicyKind::Planner:
        case PolicyKind::PlannerWithSubsidy: {
            if (!spec.planner_controls)
                throw DomainError("policy.planner_controls: required for planner policies");
            std::optional<PlannerSubsidy> sub;
            if (spec.kind == PolicyKind::PlannerWithSubsidy)
                sub = PlannerSubsidy{spec.targets, spec.budget_share.value_or(0.0)};
            PlannerEvaluation ev = planner_objective(*spec.planner_controls, sub, q, ref, opt,
                                                     baseline.vec, spec.deduct_subsidy_cost);
            out.s_inc = ev.s_inc;
            out.state = std::move(ev.state);
            break;
        }
    }
    out.report = welfare(out.state, q, false);
    out.report_net = welfare(out.state, q, true);
    if (spec.kind == PolicyKind::None) {
        out.welfare_index = out.welfare_index_net = 100.0;
    } else {
        out.welfare_index = welfare_index(out.report, ref, q);
        out.welfare_index_net = welfare_index(out.report_net, ref, q);
    }
    return out;
}

PolicyOutcome net_welfare(const PolicySpec& spec, const Primitives& p, const SolverOptions& opt) {
    Primitives q = p;
    q.varsigma = spec.varsigma;
    const EquilibriumState baseline = solve_equilibrium(q, {}, opt);
    return net_welfare(spec, q, baseline, opt);
}

PlannerEvaluation planner_objective(const PlannerControls& controls,
                                    const std::optional<PlannerSubsidy>& subsidy,
                                    const Primitives& p, const WelfareReport& reference,
                                    const SolverOptions& opt,
                                    const std::optional<FixedPoint>& start, bool deduct_cost) {
    for (double c : controls)
        if (!(c > 0)) throw DomainError("planner controls must be positive");
    PolicyInputs in;
    in.pinned = to_pinned(controls);
    if (subsidy && subsidy->budget_share > 0) {
        in.budget_share = subsidy->budget_share;
        for (auto k : kAllTypes) in.budget_targets[idx(k)] = subsidy->targets[idx(k)] ? 1.0 : 0.0;
    }
    PlannerEvaluation ev{0.0, solve_equilibrium(p, in, opt, start), 0.0};
    for (auto k : kAllTypes) ev.s_inc = std::max(ev.s_inc, ev.state.subsidy[idx(k)]);
    ev.welfare_index = welfare_index(welfare(ev.state, p, deduct_cost), reference, p);
    return ev;
}

namespace {

struct Vertex {
    std::array<double, 6> y;  // log controls
    double f;                 // minimized: -welfare index
};

struct StartResult {
    Vertex best{};
    std::vector<TracePoint> trace;
    bool feasible = false;
};

using Objective = std::function<double(const std::array<double, 6>&)>;

// Nelder-Mead on log controls, clamped to the box; returns the best vertex.
Vertex nelder_mead(const Objective& f, const std::array<double, 6>& y0, double step,
                   int max_evaluations, double tolerance, double lower, double upper) {
    int evals = 0;
    Vertex best{y0, std::numeric_limits<double>::infinity()};
    auto eval = [&](const std::array<double, 6>& y) {
        ++evals;
        const double v = f(y);
        if (v < best.f) best = {y, v};
        return v;
    };
    auto clamp = [&](std::array<double, 6> y) {
        for (double& v : y) v = std::clamp(v, lower, upper);
        return y;
    };
    std::array<Vertex, 7> s;
    s[0] = {clamp(y0), 0.0};
    s[0].f = eval(s[0].y);
    for (int i = 0; i < 6; ++i) {
        auto y = s[0].y;
        y[i] += (y[i] + step <= upper) ? step : -step;
        s[i + 1] = {clamp(y), 0.0};
        s[i + 1].f = eval(s[i + 1].y);
    }
    auto order = [&] {
        std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    while (evals < max_evaluations) {
        order();
        double diam = 0.0;
        for (int i = 1; i < 7; ++i)
            for (int j = 0; j < 6; ++j) diam = std::max(diam, std::abs(s[i].y[j] - s[0].y[j]));
        if (diam < tolerance) break;
        std::array<double, 6> cen{};
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) cen[j] += s[i].y[j] / 6.0;
        auto along = [&](double t) {
            std::array<double, 6> y;
            for (int j = 0; j < 6; ++j) y[j] = cen[j] + t * (s[6].y[j] - cen[j]);
            return clamp(y);
        };
        const auto yr = along(-1.0);
        const double fr = eval(yr);
        if (fr < s[0].f) {
            const auto ye = along(-2.0);
            const double fe = eval(ye);
            s[6] = fe < fr ? Vertex{ye, fe} : Vertex{yr, fr};
        } else if (fr < s[5].f) {
            s[6] = {yr, fr};
        } else {
            const bool outside = fr < s[6].f;
            const auto yc = along(outside ? -0.5 : 0.5);
            const double fc = eval(yc);
            if (fc < std::min(fr, s[6].f)) {
                s[6] = {yc, fc};
            } else {
                for (int i = 1; i < 7; ++i) {
                    for (int j = 0; j < 6; ++j) s[i].y[j] = s[0].y[j] + 0.5 * (s[i].y[j] - s[0].y[j]);
                    s[i].f = eval(s[i].y);
                }
            }
        }
    }
    return best;
}

PlannerControls from_log(const std::array<double, 6>& y) {
    PlannerControls c;
    for (int i = 0; i < 6; ++i) c[i] = std::exp(y[i]);
    return c;
}

StartResult run_start(int start_id, const std::array<double, 6>& y0,
                      const std::optional<PlannerSubsidy>& subsidy, const Primitives& p,
                      const WelfareReport& reference, const FixedPoint& market_vec,
                      const PlannerOptions& opt) {
    StartResult res;
    // Every evaluation starts from the market fixed point so the objective
    // is a function of the controls alone.
    const std::optional<FixedPoint> start = market_vec;
    int evals = 0;
    auto f = [&](const std::array<double, 6>& y) {
        const PlannerControls c = from_log(y);
        double val = std::numeric_limits<double>::infinity();
        try {
            const PlannerEvaluation ev = planner_objective(c, subsidy, p, reference, opt.search,
                                                           start, opt.deduct_subsidy_cost);
            val = -ev.welfare_index;
            res.feasible = true;
        } catch (const std::exception&) {
            // infeasible or non-convergent controls
        }
        res.trace.push_back({start_id, evals++, c, -val});
        return val;
    };
    res.best = nelder_mead(f, y0, opt.initial_step, opt.max_evaluations, opt.simplex_tolerance,
                           opt.log_lower, opt.log_upper);
    return res;
}

}  // namespace

constexpr int kBackoffSteps = 20;

SolverOptions coarse_search_options() {
    SolverOptions o;
    o.dist.grid.log_step = 1.0 / 200.0;
    o.tolerance = 1e-7;
    o.max_iterations = 300;
    return o;
}

PlannerResult optimize_planner(const std::optional<PlannerSubsidy>& subsidy, const Primitives& p,
                               const EquilibriumState& market, const PlannerOptions& opt) {
    const PlannerControls mc = to_controls(market);
    // The search compares against the market solved at search precision.
    const EquilibriumState coarse = solve_equilibrium(p, {}, opt.search, market.vec);
    const WelfareReport coarse_ref = welfare(coarse, p);
    std::array<double, 6> base;
    for (int i = 0; i < 6; ++i) base[i] = std::log(std::max(mc[i], 1e-4));

    std::vector<std::array<double, 6>> starts(static_cast<std::size_t>(std::max(opt.starts, 1)));
    std::mt19937_64 rng(opt.seed);
    for (std::size_t s = 0; s < starts.size(); ++s) {
        starts[s] = base;
        if (s == 0) continue;
        for (double& v : starts[s]) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            v += 2.0 * u - 1.0;
        }
    }

    std::vector<StartResult> results(starts.size());
    const int workers = std::max(1, opt.workers);
    std::vector<std::thread> pool;
    std::atomic_size_t next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < starts.size();)
            results[i] =
                run_start(static_cast<int>(i), starts[i], subsidy, p, coarse_ref, coarse.vec, opt);
    };
    if (workers == 1) {
        work();
    } else {
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    PlannerResult out;
    std::size_t best = results.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.trace.insert(out.trace.end(), results[i].trace.begin(), results[i].trace.end());
        if (!results[i].feasible) continue;
        ++out.feasible_starts;
        if (best == results.size() || results[i].best.f < results[best].best.f ||
            (results[i].best.f == results[best].best.f && results[i].best.y < results[best].best.y))
            best = i;
    }
    if (best == results.size() || !std::isfinite(results[best].best.f))
        throw InfeasibleError("planner: every start is infeasible");

    const WelfareReport reference = welfare(market, p);
    auto finish = [&](const PlannerControls& c) {
        return planner_objective(c, subsidy, p, reference, opt.solver, market.vec,
                                 opt.deduct_subsidy_cost);
    };
    // The search optimum usually sits on the labor-feasibility edge, which
    // moves slightly with precision. Back off toward the market controls
    // until the point is feasible at full precision.
    const std::array<double, 6>& y_best = results[best].best.y;
    auto along = [&](double t) {
        PlannerControls c;
        for (int i = 0; i < 6; ++i) c[i] = std::exp(base[i] + t * (y_best[i] - base[i]));
        return c;
    };
    auto attempt = [&](double t) -> std::optional<PlannerEvaluation> {
        try {
            return finish(along(t));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    std::optional<PlannerEvaluation> ev = attempt(1.0);
    double t_used = 1.0;
    if (!ev) {
        double lo = 0.0, hi = 1.0;
        std::optional<PlannerEvaluation> good;
        for (int k = 0; k < kBackoffSteps; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (auto e = attempt(mid)) {
                lo = mid;
                good = std::move(e);
            } else {
                hi = mid;
            }
        }
        ev = std::move(good);
        t_used = lo;
    }
    out.controls = along(t_used);
    // Polish at full precision from the backed-off point.
    if (ev && opt.polish_evaluations > 0) {
        auto f = [&](const std::array<double, 6>& y) {
            try {
                PlannerEvaluation e = finish(from_log(y));
                const double val = -e.welfare_index;
                if (e.welfare_index > ev->welfare_index) {
                    ev = std::move(e);
                    out.controls = from_log(y);
                }
                return val;
            } catch (const std::exception&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        std::array<double, 6> y0;
        for (int i = 0; i < 6; ++i) y0[i] = std::log(out.controls[i]);
        nelder_mead(f, y0, opt.polish_step, opt.polish_evaluations, opt.simplex_tolerance,
                    opt.log_lower, opt.log_upper);
    }
    // The market allocation is always available to the planner.
    PlannerEvaluation replica = finish(mc);
    if (!ev || ev->welfare_index < replica.welfare_index) {
        out.controls = mc;
        ev = std::move(replica);
    }
    out.state = std::move(ev->state);
    out.s_inc = ev->s_inc;
    out.report = welfare(out.state, p, opt.deduct_subsidy_cost);
    out.welfare_index = welfare_index(welfare(out.state, p, false), reference, p);
    out.welfare_index_net = welfare_index(welfare(out.state, p, true), reference, p);
    return out;
}

}  // namespace growth
