#include "doctest.h"
#include "support.hpp"

#include "growth/firm_value.hpp"

using namespace growth;

TEST_CASE("closed-form values match direct integration of the value equations") {
    const Primitives p;
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Environment env = oracle::random_environment(rng, p);
        for (auto k : kAllTypes) {
            const double c = env.q_min[idx(k)];
            const auto grid = oracle::log_grid(c, 10 * c, 200);
            const auto ode = oracle::integrate_value(k, env, p, grid);
            const ValueCurve v(k, env, p);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (i == 0) {
                    CHECK(v(grid[i]) == 0.0);
                    continue;
                }
                const double rel = std::abs(v(grid[i]) - ode[i]) / std::abs(ode[i]);
                worst = std::max(worst, rel);
            }
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("exit formula is the smooth-pasting root of the own-type branch") {
    const Primitives p;
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Environment env = oracle::random_environment(rng, p);
        for (auto k : kAllTypes) {
            const double root = oracle::smooth_pasting_root(k, env, p);
            const double c = exit_threshold(k, env, p).q_min;
            CHECK(std::abs(root - c) <= 1e-8 * c);
        }
    }
}

TEST_CASE("value curves vanish at and below their thresholds and are continuous at the applied-low knot") {
    const Primitives p;
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Environment env = oracle::random_environment(rng, p);
        const double c_al = env.q_min[idx(ResearchType::AppliedLow)];
        for (auto k : kAllTypes) {
            const ValueCurve v(k, env, p);
            const double c = env.q_min[idx(k)];
            CHECK(v(c) == 0.0);
            CHECK(v(0.5 * c) == 0.0);
            CHECK(v.raw(c) == 0.0);
            if (k != ResearchType::AppliedLow && c_al > c) {
                // A jump would survive shrinking the gap; slope times gap does not.
                for (double d : {1e-6, 1e-9}) {
                    const double below = v(c_al * (1 - d)), above = v(c_al * (1 + d));
                    CHECK(std::abs(above - below) <= 10 * d * c_al);
                }
            }
        }
    }
}

TEST_CASE("value curves are nondecreasing above the threshold") {
    const Primitives p;
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const Environment env = oracle::random_environment(rng, p);
        for (auto k : kAllTypes) {
            const ValueCurve v(k, env, p);
            const auto grid = oracle::log_grid(env.q_min[idx(k)], 20 * env.q_min[idx(k)], 400);
            for (std::size_t i = 1; i < grid.size(); ++i) CHECK(v(grid[i]) >= v(grid[i - 1]));
        }
    }
}

TEST_CASE("multi-good firm value is the sum of single-good values") {
    const Primitives p;
    std::mt19937_64 rng(15);
    const Environment env = oracle::random_environment(rng, p);
    const ValueCurve v(ResearchType::AppliedHigh, env, p);
    const std::vector<double> goods{1.1, 1.7, 2.4, 3.9};
    double firm = 0.0;
    for (double q : goods) firm += v(q);
    double one_by_one = 0.0;
    for (double q : goods) one_by_one += ValueCurve(ResearchType::AppliedHigh, env, p)(q);
    CHECK(firm == one_by_one);
}

TEST_CASE("exit threshold edge cases") {
    const Primitives p;
    Environment env;
    env.w = 2.0;
    env.omega = {env.w * p.phi, 0.1, env.w * p.phi + 0.05};
    const auto t_al = exit_threshold(ResearchType::AppliedLow, env, p);
    CHECK(t_al.q_min == 0.0);
    CHECK(t_al.never_exit);
    CHECK(exit_threshold(ResearchType::Basic, env, p).never_exit);
    CHECK_FALSE(exit_threshold(ResearchType::AppliedHigh, env, p).never_exit);

    Primitives more = p;
    more.phi = p.phi * 1.5;
    CHECK(exit_threshold_value(0.1, 2.0, more) > exit_threshold_value(0.1, 2.0, p));
}

TEST_CASE("environment validation") {
    const Primitives p;
    Environment env;
    env.g = 0.0;
    CHECK_THROWS_AS(ValueCurve(ResearchType::AppliedLow, env, p), DomainError);
    env.g = 0.02;
    env.r = -1.0;
    CHECK_THROWS_AS(ValueCurve(ResearchType::AppliedLow, env, p), DomainError);
    CHECK_THROWS_AS(value_transitioning(1.0, ResearchType::AppliedLow, Environment{}, p), DomainError);
}

TEST_CASE("innovation rate and option value") {
    const Primitives p;
    CHECK(optimal_innovation_rate(0.0, 1.0, 2.0, p) == 0.0);
    CHECK(rd_option_value(0.0, 1.0, 2.0, p) == 0.0);
    CHECK_THROWS_AS(optimal_innovation_rate(1.0, 1.0, 0.0, p), DomainError);
    CHECK_THROWS_AS(optimal_innovation_rate(-1.0, 1.0, 1.0, p), DomainError);

    std::mt19937_64 rng(16);
    for (int i = 0; i < 200; ++i) {
        const double e = oracle::uniform(rng, 0.01, 3.0), th = oracle::uniform(rng, 0.3, 2.0);
        const double w = oracle::uniform(rng, 0.5, 3.0);
        const double x = optimal_innovation_rate(e, th, w, p);
        CHECK(optimal_innovation_rate(e, 2 * th, w, p) == doctest::Approx(2 * x).epsilon(1e-14));
        const double om = rd_option_value(e, th, w, p);
        CHECK(std::abs(om - (x * e - w * rd_labor_demand(x, th, p))) <= 1e-12 * std::max(1.0, om));
        CHECK(om >= 0.0);
        // The optimum beats nearby rates.
        for (double f : {0.9, 1.1})
            CHECK(om >= f * x * e - w * rd_labor_demand(f * x, th, p));
        // Envelope: increasing in the expected gain.
        CHECK(rd_option_value(e * 1.01, th, w, p) > om);
    }
}

TEST_CASE("expected innovation value") {
    const Primitives p;
    std::mt19937_64 rng(17);
    const Environment env = oracle::random_environment(rng, p);
    const ValueCurve v(ResearchType::AppliedLow, env, p);

    SUBCASE("point mass") {
        const std::vector<double> grid{0.0, 1.2, 1.5};
        const std::vector<double> F{0.0, 1.0, 1.0};
        const double shift = applied_step(env.xi, p) * env.q_bar;
        const double got = expected_innovation_value(v, grid, F, env, p);
        // Trapezoid splits the point mass between the two neighbors of node 1.
        CHECK(got == doctest::Approx(0.5 * (v(shift) + v(1.2 + shift))).epsilon(1e-14));
        const std::vector<double> F1{1.0, 1.0, 1.0};
        CHECK(expected_innovation_value(v, grid, F1, env, p) == doctest::Approx(v(shift)));
    }
    SUBCASE("zero value curve") {
        Environment dead = env;
        dead.q_min[idx(ResearchType::AppliedLow)] = 1e6;
        const ValueCurve z(ResearchType::AppliedLow, dead, p);
        const std::vector<double> grid{0.0, 1.0, 2.0};
        const std::vector<double> F{0.2, 0.7, 1.0};
        CHECK(expected_innovation_value(z, grid, F, dead, p) == 0.0);
    }
    SUBCASE("unnormalized CDF is rejected") {
        const std::vector<double> grid{0.0, 1.0};
        const std::vector<double> F{0.2, 0.9};
        CHECK_THROWS_AS(expected_innovation_value(v, grid, F, env, p), DomainError);
    }
    SUBCASE("grid refinement") {
        // Smooth CDF of a lognormal-like law on a coarse and a 10x finer grid.
        auto cdf = [](double q) { return q <= 0 ? 0.0 : 0.5 * std::erfc(-std::log(q / 1.3) / (0.6 * std::sqrt(2.0))); };
        auto build = [&](int n) {
            std::vector<double> g{0.0}, F{0.0};
            for (int i = 1; i <= n; ++i) {
                const double q = 8.0 * i / n;
                g.push_back(q);
                F.push_back(i == n ? 1.0 : cdf(q));
            }
            return std::pair{g, F};
        };
        const auto [g1, F1] = build(400);
        const auto [g2, F2] = build(4000);
        const double coarse = expected_innovation_value(v, g1, F1, env, p);
        const double fine = expected_innovation_value(v, g2, F2, env, p);
        CHECK(std::abs(coarse - fine) < 1e-4);
    }
}

TEST_CASE("entrant rate") {
    const Primitives p;
    CHECK(entrant_rate({0.0, 0.0, 0.0}, 2.0, p).x == 0.0);
    const auto a = entrant_rate({0.3, 0.5, 0.2}, 2.0, p);
    Primitives q = p;
    q.theta_e = 2 * p.theta_e;
    CHECK(entrant_rate({0.3, 0.5, 0.2}, 2.0, q).x == doctest::Approx(2 * a.x).epsilon(1e-14));
    const PerType pr = entry_type_probabilities(p);
    CHECK(a.expected_value == doctest::Approx(pr[0] * 0.3 + pr[1] * 0.5 + pr[2] * 0.2));
}
