#include <benchmark/benchmark.h>

#include "growth/mc_oracle.hpp"
#include "growth/policy.hpp"

using namespace growth;

namespace {

const EquilibriumState& market() {
    static const EquilibriumState s = solve_equilibrium(Primitives{});
    return s;
}

void BM_BaselineSolve(benchmark::State& st) {
    const Primitives p;
    for (auto _ : st) benchmark::DoNotOptimize(solve_equilibrium(p).g);
}
BENCHMARK(BM_BaselineSolve)->Unit(benchmark::kMillisecond);

// Warm start from the solved fixed point, as inside a policy search.
void BM_WarmSolve(benchmark::State& st) {
    const Primitives p;
    const FixedPoint start = market().vec;
    for (auto _ : st) benchmark::DoNotOptimize(solve_equilibrium(p, {}, {}, start).g);
}
BENCHMARK(BM_WarmSolve)->Unit(benchmark::kMillisecond);

void BM_Distributions(benchmark::State& st) {
    const Primitives p;
    const auto& s = market();
    const DistributionInputs in{s.x, s.x_e, s.q_min};
    DistributionOptions opt;
    opt.grid.log_step = 1.0 / static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(solve_distributions(in, p, {}, opt).g);
}
BENCHMARK(BM_Distributions)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_ValueCurve(benchmark::State& st) {
    const Primitives p;
    const Environment env = market().environment();
    const ValueCurve v(ResearchType::AppliedHigh, env, p);
    double q = 1.0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(v(q));
        q = q < 5.0 ? q + 1e-3 : 1.0;
    }
}
BENCHMARK(BM_ValueCurve);

void BM_Philox(benchmark::State& st) {
    Philox4x32::Counter c{0, 0, 0, 0};
    const Philox4x32::Key k{0x12345678, 0x9abcdef0};
    for (auto _ : st) {
        benchmark::DoNotOptimize(Philox4x32::block(c, k));
        ++c[0];
    }
    st.SetItemsProcessed(st.iterations() * 4);
}
BENCHMARK(BM_Philox);

void BM_Panel(benchmark::State& st) {
    const Primitives p;
    OracleSettings o;
    o.lines = 10000;
    o.horizon = 10.0;
    o.burn_in = 1.0;
    o.snapshots = 2;
    for (auto _ : st) benchmark::DoNotOptimize(simulate_panel(market(), p, o, 1).growth_emp);
    st.SetItemsProcessed(st.iterations() * static_cast<long>(o.lines) * 1000);
}
BENCHMARK(BM_Panel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
