#include <benchmark/benchmark.h>

#include "qbm/exact_sim.hpp"
#include "qbm/phases.hpp"
#include "qbm/rwa.hpp"

using namespace qbm;

namespace {

FullModel position_model(std::size_t n) {
    return make_model({1.0, 1.0, -0.5, 0.0}, CouplingType::Position, Renormalization::Renormalized, 0.1, 20.0, n, 10.0);
}

}  // namespace

static void BM_LogNegativity(benchmark::State& state) {
    const GaussianState s = two_mode_squeezed(1.3, {}, 0.8);
    for (auto _ : state) benchmark::DoNotOptimize(log_negativity(s));
}
BENCHMARK(BM_LogNegativity);

static void BM_NormalModes(benchmark::State& state) {
    const FullModel m = position_model(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        ExactSimulator sim(m);
        benchmark::DoNotOptimize(sim.modes());
    }
}
BENCHMARK(BM_NormalModes)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_EvolveBatch(benchmark::State& state) {
    const FullModel m = position_model(static_cast<std::size_t>(state.range(0)));
    const ExactSimulator sim(m);
    const auto init = two_mode_squeezed(3.0, m.minus_mode());
    const auto times = uniform_grid(10.0, 0.005);
    for (auto _ : state) benchmark::DoNotOptimize(sim.evolve(init, times));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(times.size()));
}
BENCHMARK(BM_EvolveBatch)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_StationaryQuadrature(benchmark::State& state) {
    const OhmicSpectralDensity j(0.1, 20.0);
    const double omega_plus = position_model(100).frequencies().omega_plus;
    const double temperature = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(stationary_variances_position(j, omega_plus, temperature));
}
BENCHMARK(BM_StationaryQuadrature)->Arg(0)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_AmplitudeSolve(benchmark::State& state) {
    const auto bath = discretize(OhmicSpectralDensity(0.1, 20.0), static_cast<std::size_t>(state.range(0)), 1.0);
    const auto times = uniform_grid(20.0, 0.0025);
    for (auto _ : state) benchmark::DoNotOptimize(solve_amplitude(bath, 1.0, times));
}
BENCHMARK(BM_AmplitudeSolve)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
