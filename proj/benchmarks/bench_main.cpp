#include "qec3/analysis.hpp"
#include "qec3/codes.hpp"
#include "qec3/experiment.hpp"
#include "qec3/qcore.hpp"
#include "qec3/trajectories.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace qec3;

Ket bell() { return named_initial_state("bell12_21"); }

ChannelSet two_site_ladder() {
    const ChannelSet one = ladder_indistinguishable(1.0);
    return merge(embed(one, 0, 2), embed(one, 1, 2));
}

void bm_negativity(benchmark::State& state) {
    const DensityMatrix rho = to_density(bell());
    for (auto _ : state) benchmark::DoNotOptimize(negativity(rho, {0}));
}
BENCHMARK(bm_negativity);

void bm_pt_spectrum(benchmark::State& state) {
    const DensityMatrix rho = to_density(bell());
    for (auto _ : state) benchmark::DoNotOptimize(pt_negative_spectrum(rho, {0}));
}
BENCHMARK(bm_pt_spectrum);

void bm_jump_trajectory_pure(benchmark::State& state) {
    SimParams p;
    p.dt = 1e-3;
    p.t_max = 1.0;
    p.record_stride = 1000;
    p.record_event_negativity = false;
    const ChannelSet cs = two_site_ladder();
    const auto code = jump_code(1.0);
    std::uint32_t traj = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(jump_trajectory(bell(), cs, code, p, traj++));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.t_max / p.dt));
}
BENCHMARK(bm_jump_trajectory_pure);

void bm_jump_trajectory_mixed(benchmark::State& state) {
    SimParams p;
    p.dt = 1e-3;
    p.t_max = 0.5;
    p.eta = 0.9;
    p.record_stride = 1000;
    p.record_event_negativity = false;
    const ChannelSet cs = two_site_ladder();
    const auto code = jump_code(1.0);
    std::uint32_t traj = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(jump_trajectory(bell(), cs, code, p, traj++));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.t_max / p.dt));
}
BENCHMARK(bm_jump_trajectory_mixed);

void bm_diffusion_trajectory_pure(benchmark::State& state) {
    SimParams p;
    p.dt = 1e-4;
    p.t_max = 0.1;
    p.record_stride = 1000;
    p.record_event_negativity = false;
    const ChannelSet cs = two_site_ladder();
    const auto code = diffusion_code(1.0);
    std::uint32_t traj = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            diffusion_trajectory(named_initial_state("bell00_22"), cs, code, p, traj++));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.t_max / p.dt));
}
BENCHMARK(bm_diffusion_trajectory_pure);

void bm_master_step(benchmark::State& state) {
    SimParams p;
    p.dt = 1e-2;
    p.t_max = 1.0;
    p.record_stride = 100;
    const ChannelSet one = structure_ops(Structure::E, 1.0, 1.0);
    const ChannelSet cs = merge(embed(one, 0, 2), embed(one, 1, 2));
    const DensityMatrix rho0 = to_density(coeffs_state(make_coeffs(0.179, 0.2386, 0.9545)));
    for (auto _ : state) benchmark::DoNotOptimize(master_evolve(rho0, cs, std::nullopt, p));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.t_max / p.dt));
}
BENCHMARK(bm_master_step);

} // namespace

BENCHMARK_MAIN();
