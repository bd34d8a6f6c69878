#include "eddp/engine.hpp"
#include "eddp/generators.hpp"
#include "eddp/oracle.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_EddpFastReservoir(benchmark::State& state) {
    eddp::ReservoirParams rp;
    rp.N = static_cast<int>(state.range(0));
    const auto inst = eddp::gen_reservoir(rp, 1);
    eddp::RunConfig cfg;
    cfg.T = 12;
    cfg.epsilon = 0.5;
    cfg.max_iters = 50;
    cfg.workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(eddp::run_eddp_fast(inst, cfg));
}
BENCHMARK(BM_EddpFastReservoir)->Args({10, 1})->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);

void BM_SddpReservoir(benchmark::State& state) {
    const auto inst = eddp::gen_reservoir(eddp::ReservoirParams{}, 1);
    eddp::RunConfig cfg;
    cfg.T = 12;
    cfg.max_iters = 50;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(eddp::run_sddp(inst, cfg));
}
BENCHMARK(BM_SddpReservoir)->Unit(benchmark::kMillisecond);

void BM_TreeOracleChain(benchmark::State& state) {
    auto inst = eddp::make_chain_instance();
    auto s = inst.scenarios[0];
    s.b(0) = -0.1;
    inst.scenarios.push_back(s);
    inst.finalize();
    const int H = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eddp::oracle_value(inst, H, eddp::OracleMethod::Tree));
}
BENCHMARK(BM_TreeOracleChain)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

} // namespace
