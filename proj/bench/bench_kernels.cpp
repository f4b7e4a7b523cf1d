// Serial reference kernels against their OpenMP counterparts, plus one full
// split step, across grid sizes.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "qtl/kernels.hpp"
#include "qtl/phase_grid.hpp"
#include "qtl/quantum_evolution.hpp"

namespace {

qtl::WaveState make_state(std::size_t n) {
    const qtl::Grid g = qtl::make_grid(-10.0, 10.0, n);
    return qtl::init_gaussian(g, -3.0, 8.0, 0.5, 1e-2);
}

const qtl::SystemParams kParams{};

template <bool Parallel>
void BM_position_sums(benchmark::State& st) {
    const auto s = make_state(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        auto r = Parallel ? qtl::kernels::position_sums(s.amplitudes, s.grid, -3.0)
                          : qtl::kernels::reference::position_sums(s.amplitudes, s.grid, -3.0);
        benchmark::DoNotOptimize(r);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_potential_phase(benchmark::State& st) {
    auto s = make_state(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        if (Parallel) qtl::kernels::potential_phase(s.amplitudes, s.grid, kParams, 0.1, 1e-3, 0);
        else qtl::kernels::reference::potential_phase(s.amplitudes, s.grid, kParams, 0.1, 1e-3, 0);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_measurement_weight(benchmark::State& st) {
    auto s = make_state(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        if (Parallel) qtl::kernels::measurement_weight(s.amplitudes, s.grid, -3.0, 1e-6, 1e-6, 0.0);
        else qtl::kernels::reference::measurement_weight(s.amplitudes, s.grid, -3.0, 1e-6, 1e-6, 0.0);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_split_step(benchmark::State& st) {
    auto s = make_state(static_cast<std::size_t>(st.range(0)));
    qtl::MeasureParams mp;
    mp.hbar = 1e-2;
    mp.k = 1e3;
    qtl::SplitStepPropagator prop(s.grid, kParams, mp, 1e-3);
    for (auto _ : st) {
        prop.step(s, 0.0);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_position_sums<false>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_position_sums<true>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_potential_phase<false>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_potential_phase<true>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_measurement_weight<false>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_measurement_weight<true>)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_split_step)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

BENCHMARK_MAIN();
