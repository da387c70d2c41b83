#include "growth/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace growth {

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * c[0];
        const std::uint64_t p1 = std::uint64_t{M1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

namespace {

constexpr std::uint8_t kInactive = 3;

// Counter domains, so that no two draws share a counter.
enum Stream : std::uint32_t { kLines = 0, kEvents = 1, kEntry = 2, kInit = 3, kNull = 4 };

Philox4x32::Key key_of(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Sequential uniforms from one counter family.
class UniformStream {
public:
    UniformStream(Philox4x32::Key key, Stream s, std::uint32_t a, std::uint32_t b)
        : key_(key), s_(s), a_(a), b_(b) {}
    double next() {
        if (pos_ == 4) {
            buf_ = Philox4x32::block({n_++, a_, b_, s_}, key_);
            pos_ = 0;
        }
        return to_unit(buf_[pos_++]);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t s_, a_, b_;
    std::uint32_t n_ = 0;
    Philox4x32::Counter buf_{};
    int pos_ = 4;
};

int poisson(double mean, UniformStream& u) {
    // Sum of small-mean pieces, each by multiplication of uniforms.
    int total = 0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(mean / 16.0)));
    const double limit = std::exp(-mean / pieces);
    for (int j = 0; j < pieces; ++j) {
        double prod = u.next();
        while (prod > limit) {
            ++total;
            prod *= u.next();
        }
    }
    return total;
}

std::size_t pick(const PerType& cum, double u) {
    for (std::size_t k = 0; k < 3; ++k)
        if (u < cum[k]) return k;
    return 2;
}

double conditional_cdf_at(const DistributionSet& d, std::size_t k, std::size_t i) {
    return d.F_type[k][i] / d.phi[k];
}

double inverse_type_cdf(const DistributionSet& d, std::size_t k, double u) {
    const auto& F = d.F_type[k];
    const double target = u * d.phi[k];
    const auto it = std::lower_bound(F.begin(), F.end(), target);
    const std::size_t i = static_cast<std::size_t>(it - F.begin());
    if (i == 0) return d.grid[0];
    if (i >= F.size()) return d.grid.back();
    const double lo = F[i - 1], hi = F[i];
    const double w = hi > lo ? (target - lo) / (hi - lo) : 1.0;
    return d.grid[i - 1] + w * (d.grid[i] - d.grid[i - 1]);
}

struct Event {
    std::uint8_t type;
};

}  // namespace

double analytic_type_cdf(const DistributionSet& dist, ResearchType k, double q) {
    const std::size_t t = idx(k);
    if (!(dist.phi[t] > 0)) return 0.0;
    const auto& g = dist.grid;
    if (q < g.front()) return 0.0;
    if (q >= g.back()) return 1.0;
    const auto it = std::upper_bound(g.begin(), g.end(), q);
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    const double lo = i == 0 ? 0.0 : conditional_cdf_at(dist, t, i - 1);
    const double hi = conditional_cdf_at(dist, t, i);
    const double w = (q - g[i - 1]) / (g[i] - g[i - 1]);
    return std::min(1.0, lo + w * (hi - lo));
}

double ks_distance(const std::vector<double>& sorted, const DistributionSet& dist, ResearchType k) {
    const double n = static_cast<double>(sorted.size());
    if (sorted.empty()) return 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = analytic_type_cdf(dist, k, sorted[i]);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - F),
                          std::abs(static_cast<double>(i) / n - F)});
    }
    return worst;
}

PanelStats sample_from_analytic(const DistributionSet& dist, std::size_t n, std::uint64_t seed) {
    PanelStats out;
    out.phi_hat = dist.phi;
    out.phi_np_hat = dist.phi_np;
    out.q_bar_hat_emp = dist.q_bar;
    out.growth_emp = dist.g;
    for (auto k : kAllTypes) {
        auto& s = out.samples[idx(k)];
        if (!(dist.phi[idx(k)] > 0)) continue;
        UniformStream u(key_of(seed), kNull, static_cast<std::uint32_t>(idx(k)), 0);
        s.resize(n);
        for (auto& v : s) v = inverse_type_cdf(dist, idx(k), u.next());
        std::sort(s.begin(), s.end());
    }
    return out;
}

PanelStats simulate_panel(const EquilibriumState& state, const Primitives& p,
                          const OracleSettings& opt, std::uint64_t seed, int workers) {
    const std::size_t N = opt.lines;
    const double dt = opt.dt;
    if (N == 0) throw DomainError("oracle needs at least one line");
    if (!(dt > 0) || !(opt.horizon > 0)) throw DomainError("oracle dt and horizon must be > 0");
    if (opt.burn_in < 0 || opt.burn_in >= opt.horizon)
        throw DomainError("oracle burn-in must lie in [0, horizon)");

    const PerType entry_prob = entry_type_probabilities(p);
    PerType death{}, move{}, innovate{};
    for (auto k : kAllTypes) {
        const std::size_t t = idx(k);
        death[t] = p.varphi * dt;
        move[t] = death[t] + p.transition_rate(k) * dt;
        innovate[t] = move[t] + state.x[t] * dt;
        if (!(innovate[t] < 0.1))
            throw DomainError("oracle dt too large: per-step event probability " +
                              std::to_string(innovate[t]) + " for type " + type_name(k));
    }
    const double tau_guess = state.x_e + state.x[0] + state.x[1] + state.x[2];
    if (!(state.x_e * dt < 0.1) || !(tau_guess * dt < 0.1) || !(state.g * dt < 0.1))
        throw DomainError("oracle dt too large for the entry, innovation or drift rate");

    PerType step{};
    for (auto k : kAllTypes)
        step[idx(k)] = opt.step_rule == StepRule::EconomyAverage ? state.zeta
                                                                 : innovation_step(k, state.xi, p);
    PerType entry_cum{entry_prob[0], entry_prob[0] + entry_prob[1], 1.0};

    const double em1 = p.epsilon - 1;
    const double target = productivity_index_target(p);
    const auto key = key_of(seed);
    const auto& d = state.dist;

    // Initial panel from the analytic measures.
    std::vector<double> q(N);
    std::vector<std::uint8_t> type(N, kInactive);
    for (std::size_t i = 0; i < N; ++i) {
        const auto r = Philox4x32::block({static_cast<std::uint32_t>(i), 0, 0, kInit}, key);
        const double u0 = to_unit(r[0]);
        const auto it = std::lower_bound(d.F.begin(), d.F.end(), u0);
        const std::size_t node = std::min(static_cast<std::size_t>(it - d.F.begin()), d.grid.size() - 1);
        const double below = node == 0 ? 0.0 : d.F[node - 1];
        const double w = d.mass[node] > 0 ? (u0 - below) / d.mass[node] : 1.0;
        const double left = node == 0 ? d.grid[0] : d.grid[node - 1];
        q[i] = left + std::clamp(w, 0.0, 1.0) * (d.grid[node] - left);
        double u1 = to_unit(r[1]) * d.mass[node];
        for (std::size_t k = 0; k < 3; ++k) {
            const double m = d.type_mass[k][node];
            if (u1 < m) {
                type[i] = static_cast<std::uint8_t>(k);
                break;
            }
            u1 -= m;
        }
    }

    auto recompute = [&](double& I, double& Qsum) {
        I = 0.0;
        Qsum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            Qsum += q[i];
            if (type[i] != kInactive) I += std::pow(q[i], em1);
        }
    };
    double I = 0.0, Qsum = 0.0;
    recompute(I, Qsum);
    auto scale = [&] {
        if (!(I > 0)) throw DegenerateEconomy("oracle panel lost every active line");
        return std::pow(I / (static_cast<double>(N) * target), 1.0 / em1);
    };

    const auto steps = static_cast<std::size_t>(std::llround(opt.horizon / dt));
    const auto burn_steps = static_cast<std::size_t>(std::llround(opt.burn_in / dt));
    std::vector<std::size_t> snap_at;
    for (int j = 1; j <= opt.snapshots; ++j)
        snap_at.push_back(burn_steps + static_cast<std::size_t>(std::llround(
                                           static_cast<double>(steps - burn_steps) * j / opt.snapshots)));

    const int nw = std::max(1, workers);
    const std::size_t part_size = (N + kLinePartitions - 1) / kLinePartitions;
    struct Partition {
        std::vector<std::uint8_t> events;  // innovator types, in line order
        double index_loss = 0.0;
    };
    std::vector<Partition> parts(kLinePartitions);

    PanelStats out;
    double sum_t = 0, sum_l = 0, sum_tt = 0, sum_tl = 0;
    std::size_t n_fit = 0;
    std::size_t next_snap = 0;

    for (std::size_t t = 0; t < steps; ++t) {
        const double S = scale();
        const PerType floor_q{state.q_min[0] * S, state.q_min[1] * S, state.q_min[2] * S};
        const std::uint32_t tc = static_cast<std::uint32_t>(t);

        // Exit, destruction, transition and innovation draws per line.
        auto run_partition = [&](std::size_t part) {
            Partition& pt = parts[part];
            pt.events.clear();
            pt.index_loss = 0.0;
            const std::size_t lo = part * part_size, hi = std::min(N, lo + part_size);
            Philox4x32::Counter r{};
            for (std::size_t i = lo; i < hi; ++i) {
                if ((i & 3u) == 0 || i == lo)
                    r = Philox4x32::block({static_cast<std::uint32_t>(i >> 2), tc, 0, kLines}, key);
                const std::uint8_t k = type[i];
                if (k == kInactive) continue;
                if (q[i] <= floor_q[k]) {
                    type[i] = kInactive;
                    pt.index_loss += std::pow(q[i], em1);
                    continue;
                }
                const double u = to_unit(r[i & 3u]);
                if (u >= innovate[k]) continue;
                if (u < death[k]) {
                    type[i] = kInactive;
                    pt.index_loss += std::pow(q[i], em1);
                } else if (u < move[k]) {
                    type[i] = static_cast<std::uint8_t>(ResearchType::AppliedLow);
                } else {
                    pt.events.push_back(k);
                }
            }
        };
        if (nw == 1) {
            for (std::size_t part = 0; part < parts.size(); ++part) run_partition(part);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < nw; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t part = static_cast<std::size_t>(w); part < parts.size();
                         part += static_cast<std::size_t>(nw))
                        run_partition(part);
                });
            for (auto& th : pool) th.join();
        }
        for (const auto& pt : parts) I -= pt.index_loss;

        // Entrants.
        UniformStream eu(key, kEntry, tc, 0);
        std::vector<std::uint8_t> entrants(
            static_cast<std::size_t>(poisson(state.x_e * static_cast<double>(N) * dt, eu)));
        for (auto& e : entrants) e = static_cast<std::uint8_t>(pick(entry_cum, eu.next()));

        // Creative destruction: every innovation takes over a random line.
        const double jump_base = Qsum / static_cast<double>(N);  // q_bar * S
        UniformStream tu(key, kEvents, tc, 0);
        std::uint64_t innovations = 0, reassignments = 0;
        auto apply = [&](std::uint8_t k) {
            ++innovations;
            auto target_line = static_cast<std::size_t>(tu.next() * static_cast<double>(N));
            target_line = std::min(target_line, N - 1);
            if (type[target_line] != kInactive) I -= std::pow(q[target_line], em1);
            const double jump = step[k] * jump_base;
            q[target_line] += jump;
            Qsum += jump;
            type[target_line] = k;
            I += std::pow(q[target_line], em1);
            ++reassignments;
        };
        for (const auto& pt : parts)
            for (auto k : pt.events) apply(k);
        for (auto k : entrants) apply(k);
        out.innovations += innovations;
        out.reassignments += reassignments;
        if (innovations != reassignments) out.bookkeeping_ok = false;

        if ((t + 1) % 1000 == 0) recompute(I, Qsum);

        const double now = static_cast<double>(t + 1) * dt;
        if (t + 1 > burn_steps) {
            const double l = std::log(scale());
            sum_t += now;
            sum_l += l;
            sum_tt += now * now;
            sum_tl += now * l;
            ++n_fit;
        }
        while (next_snap < snap_at.size() && t + 1 == snap_at[next_snap]) {
            const double Sn = scale();
            PerType counts{};
            for (std::size_t i = 0; i < N; ++i) {
                if (type[i] == kInactive) continue;
                // Lines at or below the threshold leave at the next draw.
                if (q[i] <= state.q_min[type[i]] * Sn) continue;
                counts[type[i]] += 1.0;
                out.samples[type[i]].push_back(q[i] / Sn);
            }
            for (std::size_t k = 0; k < 3; ++k) out.phi_hat[k] += counts[k] / static_cast<double>(N);
            out.q_bar_hat_emp += Qsum / static_cast<double>(N) / Sn;
            ++next_snap;
        }
    }
    const double ns = static_cast<double>(std::max<std::size_t>(1, snap_at.size()));
    for (auto& v : out.phi_hat) v /= ns;
    out.q_bar_hat_emp /= ns;
    out.phi_np_hat = 1.0 - out.phi_hat[0] - out.phi_hat[1] - out.phi_hat[2];
    if (n_fit > 1) {
        const double n = static_cast<double>(n_fit);
        const double den = n * sum_tt - sum_t * sum_t;
        out.growth_emp = den > 0 ? (n * sum_tl - sum_t * sum_l) / den : 0.0;
    }
    for (auto& s : out.samples) std::sort(s.begin(), s.end());
    out.steps = steps;
    return out;
}

OracleReport compare_to_analytic(const PanelStats& stats, const DistributionSet& dist,
                                 const OracleSettings& opt) {
    OracleReport r;
    r.shares_ok = true;
    r.ks_ok = true;
    for (auto k : kAllTypes) {
        const std::size_t t = idx(k);
        r.share_delta[t] = stats.phi_hat[t] - dist.phi[t];
        if (std::abs(r.share_delta[t]) > opt.share_tolerance) r.shares_ok = false;
        r.ks[t] = ks_distance(stats.samples[t], dist, k);
        if (!(r.ks[t] < opt.ks_tolerance)) r.ks_ok = false;
    }
    r.growth_rel_delta = dist.g != 0 ? (stats.growth_emp - dist.g) / dist.g : stats.growth_emp;
    r.growth_ok = std::abs(r.growth_rel_delta) <= opt.growth_tolerance;
    return r;
}

}  // namespace growth
