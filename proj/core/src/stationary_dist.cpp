#include "growth/stationary_dist.hpp"

#include "mixing.hpp"

#include <algorithm>
#include <cmath>

namespace growth {

namespace {

constexpr auto AL = ResearchType::AppliedLow;
constexpr auto AH = ResearchType::AppliedHigh;
constexpr auto B = ResearchType::Basic;

// Where a jump of size d from each node lands: weight w_lo on node m, the
// rest on m + 1. Jumps past the last node land on it.
struct Jumps {
    std::vector<std::size_t> m;
    std::vector<double> w_lo;
};

Jumps locate_jumps(const std::vector<double>& q, double d) {
    const std::size_t n = q.size();
    Jumps j{std::vector<std::size_t>(n), std::vector<double>(n)};
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = q[i] + d;
        while (m + 1 < n && q[m + 1] <= t) ++m;
        if (m + 1 >= n) {
            j.m[i] = n - 1;
            j.w_lo[i] = 1.0;
        } else {
            j.m[i] = m;
            j.w_lo[i] = (q[m + 1] - t) / (q[m + 1] - q[m]);
        }
    }
    return j;
}

std::vector<double> drift_rates(const std::vector<double>& q, double g) {
    std::vector<double> a(q.size(), 0.0);
    for (std::size_t i = 1; i < q.size(); ++i) a[i] = g * q[i] / (q[i] - q[i - 1]);
    return a;
}

// Jump inflow density per unit innovation rate: J_i = sum_j W(j -> i) mass_j.
std::vector<double> landing(const Jumps& jp, const std::vector<double>& mass) {
    const std::size_t n = mass.size();
    std::vector<double> J(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (mass[i] == 0.0) continue;
        const std::size_t m = jp.m[i];
        J[m] += jp.w_lo[i] * mass[i];
        if (m + 1 < n) J[m + 1] += (1.0 - jp.w_lo[i]) * mass[i];
    }
    return J;
}

// Stationary law of the overall chain: downward drift plus jumps at rate
// tau. Solved upward from the origin; every landing point of a node lies
// at or above the node, so each balance has exactly one unknown.
std::vector<double> overall_mass(const std::vector<double>& q, const std::vector<double>& a,
                                 const Jumps& jp, double tau) {
    const std::size_t n = q.size();
    std::vector<double> pi(n, 0.0), inflow(n, 0.0);
    pi[0] = 1.0;
    double peak = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t m = jp.m[i];
        double self = 0.0;
        if (m == i) {
            self = jp.w_lo[i];
            inflow[i + 1] += (1.0 - jp.w_lo[i]) * pi[i];
        } else {
            inflow[m] += jp.w_lo[i] * pi[i];
            if (m + 1 < n) inflow[m + 1] += (1.0 - jp.w_lo[i]) * pi[i];
        }
        const double next = (pi[i] * (a[i] + tau * (1.0 - self)) - tau * inflow[i]) / a[i + 1];
        if (!(next > 1e-18 * peak)) break;  // rounding floor of the decaying tail
        pi[i + 1] = next;
        peak = std::max(peak, next);
    }
    double total = 0.0;
    for (double v : pi) total += v;
    for (double& v : pi) v /= total;
    return pi;
}

struct TypeSolve {
    std::array<std::vector<double>, 3> mass;
    PerType phi{};
    PerType flow_residual{};
    PerType exit_flow{};
    double balance_residual = 0.0;
};

// Active measures per type, solved downward from the top node.
TypeSolve type_masses(const std::vector<double>& q, const std::vector<double>& a,
                      const std::vector<double>& J, const PerType& tau_k, double tau,
                      const PerType& c, const Primitives& p) {
    const std::size_t n = q.size();
    TypeSolve out;
    auto first_active = [&](ResearchType k) {
        return static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), c[idx(k)]) - q.begin());
    };
    for (auto k : {AH, B, AL}) {
        auto& m = out.mass[idx(k)];
        m.assign(n, 0.0);
        const std::size_t lo = first_active(k);
        const double kill = tau + p.varphi + p.transition_rate(k);
        double from_above = 0.0;
        double in_total = 0.0;
        for (std::size_t i = n; i-- > lo;) {
            double src = tau_k[idx(k)] * J[i];
            if (k == AL) src += p.nu * out.mass[idx(AH)][i] + p.mu * out.mass[idx(B)][i];
            in_total += src;
            m[i] = (from_above + src) / (a[i] + kill);
            from_above = m[i] * a[i];
        }
        double phi = 0.0;
        for (double v : m) phi += v;
        const double exit = lo < n ? a[lo] * m[lo] : 0.0;
        out.phi[idx(k)] = phi;
        out.exit_flow[idx(k)] = exit;
        out.flow_residual[idx(k)] = in_total - kill * phi - exit;
        // Node balance of the discretized equations.
        for (std::size_t i = lo; i < n; ++i) {
            double src = tau_k[idx(k)] * J[i];
            if (k == AL) src += p.nu * out.mass[idx(AH)][i] + p.mu * out.mass[idx(B)][i];
            const double above = i + 1 < n ? m[i + 1] * a[i + 1] : 0.0;
            const double res = m[i] * (a[i] + kill) - above - src;
            out.balance_residual = std::max(out.balance_residual, std::abs(res));
        }
    }
    return out;
}

double overall_residual(const std::vector<double>& a, const std::vector<double>& J,
                        const std::vector<double>& pi, double tau) {
    double worst = 0.0;
    const std::size_t n = pi.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double above = i + 1 < n ? pi[i + 1] * a[i + 1] : 0.0;
        worst = std::max(worst, std::abs(pi[i] * (a[i] + tau) - above - tau * J[i]));
    }
    return worst;
}

// Anderson can stall near degenerate type mixes; after this many steps the
// inner loop falls back to plain damping.
constexpr int kAndersonBudget = 300;

std::vector<double> cumulative(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (acc += v[i]);
    return out;
}

}  // namespace

double productivity_index_target(const Primitives& p) {
    const double e = p.epsilon;
    return std::pow(e / (e - 1), e - 1);
}

std::vector<double> build_grid(const PerType& q_min, double q_bar, const GridSpec& spec) {
    if (!(q_bar > 0)) throw DomainError("grid: mean productivity must be > 0");
    double lo = q_bar * 1e-3;
    double cmax = 0.0;
    bool any = false;
    for (double c : q_min) {
        if (c > 0) {
            lo = any ? std::min(lo, c / spec.floor_divisor) : c / spec.floor_divisor;
            any = true;
            cmax = std::max(cmax, c);
        }
    }
    const double hi = std::max(spec.top_multiple * q_bar, 2.0 * cmax);
    const double h = spec.log_step;
    const long i_lo = static_cast<long>(std::floor(std::log(lo) / h));
    const long i_hi = static_cast<long>(std::ceil(std::log(hi) / h));
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(i_hi - i_lo + 5));
    q.push_back(0.0);
    for (long i = i_lo; i <= i_hi; ++i) q.push_back(std::exp(static_cast<double>(i) * h));
    for (double c : q_min) {
        if (!(c > 0)) continue;
        auto it = std::lower_bound(q.begin(), q.end(), c);
        if (it != q.end() && std::abs(*it - c) <= 1e-12 * c) {
            *it = c;
        } else if (it != q.begin() && std::abs(*(it - 1) - c) <= 1e-12 * c) {
            *(it - 1) = c;
        } else {
            q.insert(it, c);
        }
    }
    return q;
}

double growth_rate(const DistributionSet& dist, double zeta) { return dist.tau * zeta; }

double mean_relative_productivity(std::span<const double> grid, std::span<const double> F) {
    if (grid.size() != F.size() || grid.empty()) throw DomainError("grid and CDF size mismatch");
    // F is read as a right-continuous step function between nodes.
    double acc = grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) acc += (grid[i] - grid[i - 1]) * (1.0 - F[i - 1]);
    return acc;
}

DistributionSet solve_distributions(const DistributionInputs& in, const Primitives& p,
                                    const DistributionGuess& guess,
                                    const DistributionOptions& opt) {
    for (auto k : kAllTypes)
        if (in.x[idx(k)] < 0 || in.q_min[idx(k)] < 0)
            throw DomainError("distribution inputs must be nonnegative");
    if (in.x_e < 0) throw DomainError("entrant rate must be nonnegative");
    const PerType prob = entry_type_probabilities(p);
    const double target = productivity_index_target(p);
    const double em1 = p.epsilon - 1;

    GridSpec spec = opt.grid;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const std::vector<double> q = build_grid(in.q_min, guess.q_bar, spec);
        std::vector<double> qpow(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) qpow[i] = std::pow(q[i], em1);

        PerType phi = guess.phi;
        double q_bar = guess.q_bar;
        DistributionSet out;
        double change = 1.0;
        int it = 0;
        detail::AndersonMixer mixer(opt.acceleration_memory, opt.damping, [](const auto& z) {
            return z[0] >= 0 && z[1] >= 0 && z[2] >= 0 && z[0] + z[1] + z[2] <= 1.0;
        });
        for (;; ++it) {
            PerType tau_k{};
            double tau = 0.0;
            for (auto k : kAllTypes) {
                tau_k[idx(k)] = phi[idx(k)] * in.x[idx(k)] + prob[idx(k)] * in.x_e;
                tau += tau_k[idx(k)];
            }
            if (!(tau > 0)) throw DegenerateEconomy("no innovation and no entry: all lines exit");
            const double xi = spillover_share(phi[0], phi[1], phi[2], p.varsigma);
            const double zeta = economy_step_average(phi[0], phi[1], phi[2], xi, p);
            const double g = tau * zeta;
            const std::vector<double> a = drift_rates(q, g);
            const Jumps jp = locate_jumps(q, zeta * q_bar);
            std::vector<double> pi = overall_mass(q, a, jp, tau);
            const std::vector<double> J = landing(jp, pi);
            TypeSolve ts = type_masses(q, a, J, tau_k, tau, in.q_min, p);

            double index = 0.0;
            for (auto k : kAllTypes)
                for (std::size_t i = 0; i < q.size(); ++i) index += ts.mass[idx(k)][i] * qpow[i];
            const double active = ts.phi[0] + ts.phi[1] + ts.phi[2];
            if (!(active > 0) || !(index > 0))
                throw DegenerateEconomy("no active product lines survive");

            change = std::abs(std::log(target / index)) / em1;
            for (auto k : kAllTypes) change = std::max(change, std::abs(ts.phi[idx(k)] - phi[idx(k)]));

            if (change < opt.tolerance || it >= opt.max_iterations) {
                out.grid = q;
                out.mass = std::move(pi);
                out.F = cumulative(out.mass);
                out.F.back() = 1.0;
                for (double& f : out.F) f = std::min(f, 1.0);
                for (auto k : kAllTypes) {
                    out.F_type[idx(k)] = cumulative(ts.mass[idx(k)]);
                    out.type_mass[idx(k)] = std::move(ts.mass[idx(k)]);
                }
                out.phi = ts.phi;
                double np = 0.0;
                for (std::size_t i = 0; i < q.size(); ++i)
                    np += out.mass[i] - out.type_mass[0][i] - out.type_mass[1][i] -
                          out.type_mass[2][i];
                out.phi_np = np;
                out.q_bar = q_bar;
                out.tau_type = tau_k;
                out.tau = tau;
                out.xi = xi;
                out.zeta = zeta;
                out.g = g;
                out.iterations = it;
                out.inner_change = change;
                out.balance_residual =
                    std::max(ts.balance_residual, overall_residual(a, J, out.mass, tau));
                out.flow_residual = ts.flow_residual;
                out.exit_flow = ts.exit_flow;
                double tail = 0.0;
                for (std::size_t i = 0; i < q.size(); ++i)
                    if (q[i] > 0.5 * q.back()) tail += out.mass[i];
                out.upper_tail = tail;
                break;
            }
            if (it == kAndersonBudget) mixer.disable();
            const std::vector<double> z{phi[0], phi[1], phi[2], std::log(q_bar)};
            const std::vector<double> f{ts.phi[0] - phi[0], ts.phi[1] - phi[1],
                                        ts.phi[2] - phi[2], std::log(target / index) / em1};
            const std::vector<double> zn = mixer.next(z, f);
            for (int i = 0; i < 3; ++i) phi[i] = zn[i];
            q_bar = std::exp(zn[3]);
        }
        if (out.inner_change >= opt.tolerance)
            throw SolverError("distribution fixed point did not converge: change " +
                              std::to_string(out.inner_change));
        if (out.upper_tail <= spec.tail_tolerance) return out;
        spec.top_multiple *= 2.0;
    }
    throw SolverError("distribution tail does not fit the grid");
}

}  // namespace growth
