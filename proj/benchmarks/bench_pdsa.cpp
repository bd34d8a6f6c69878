#include "eddp/pdsa.hpp"

#include <benchmark/benchmark.h>

namespace {

// min x over [0, 1] with x >= 0.5.
eddp::SaddleProblem example() {
    eddp::SaddleProblem sp;
    sp.W = Eigen::MatrixXd::Ones(1, 1);
    sp.U = Eigen::MatrixXd::Zero(1, 1);
    sp.q = Eigen::VectorXd::Constant(1, 0.5);
    sp.u = Eigen::VectorXd::Zero(1);
    sp.f = eddp::PiecewiseLinearCost::affine(Eigen::VectorXd::Ones(1), 0.0);
    sp.lower = Eigen::VectorXd::Zero(1);
    sp.upper = Eigen::VectorXd::Ones(1);
    sp.nonneg = {1};
    return sp;
}

void BM_PdsaOneDim(benchmark::State& state) {
    const auto sp = example();
    const auto params = eddp::default_params(sp, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eddp::run_pdsa(sp, params, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PdsaOneDim)->Arg(250)->Arg(4000);

} // namespace
