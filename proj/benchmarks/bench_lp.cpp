#include "eddp/lp.hpp"
#include "eddp/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

eddp::LpProblem random_lp(int n, int m, std::uint64_t seed) {
    eddp::Rng rng(seed);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = rng.uniform(-1.0, 1.0);
    auto p = eddp::LpProblem::with_bounds(c, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 1.0));
    const Eigen::VectorXd mid = Eigen::VectorXd::Constant(n, 0.5);
    for (int i = 0; i < m; ++i) {
        Eigen::RowVectorXd a(n);
        for (int j = 0; j < n; ++j) a(j) = rng.uniform(-1.0, 1.0);
        p.add_geq_row(a, a.dot(mid) - 0.1);
    }
    return p;
}

void BM_SolveRandomLp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = random_lp(n, n / 2, 7);
    for (auto _ : state) benchmark::DoNotOptimize(eddp::solve_lp(p));
    state.SetComplexityN(n);
}
BENCHMARK(BM_SolveRandomLp)->RangeMultiplier(2)->Range(8, 128)->Complexity();

} // namespace
