#include "eddp/engine.hpp"
#include "eddp/generators.hpp"
#include "eddp/hddp.hpp"
#include "eddp/instance_io.hpp"
#include "eddp/oracle.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <sstream>

using namespace eddp;

namespace {

std::string text_of(const StationaryInstance& inst) {
    std::ostringstream os;
    write_instance(os, inst);
    return os.str();
}

std::string text_of(const HierarchicalInstance& h) {
    std::ostringstream os;
    write_hierarchical(os, h);
    return os.str();
}

EdParams micro_ed() {
    EdParams p;
    p.generators = 2;
    p.regions = 1;
    p.N1 = 2;
    p.N2 = 2;
    p.lambda = 0.5;
    p.eps_lo = 0.5;
    return p;
}

} // namespace

TEST(Benchmarks, ChainOracleAtHorizon20) {
    const StationaryInstance inst = make_chain_instance();
    // 0.5^20 * (2 - 0).
    EXPECT_NEAR(oracle_error_bound(inst, 20), 1.9073486328125e-6, 1e-18);
    for (OracleMethod m : {OracleMethod::Auto, OracleMethod::Tree, OracleMethod::Recursive}) {
        const OracleResult o = oracle_value(inst, 20, m);
        EXPECT_NEAR(o.value, 2.0 / 3.0, 1.91e-6);
        EXPECT_LE(o.error_bound, 1.91e-6);
    }
}

TEST(Benchmarks, TreeNodeCount) {
    EXPECT_EQ(tree_nodes(1, 5), 5u);
    EXPECT_EQ(tree_nodes(2, 10), 1023u);
    EXPECT_EQ(tree_nodes(3, 3), 13u);
}

TEST(Benchmarks, TwoScenarioTreeIsFast) {
    StationaryInstance inst = make_chain_instance();
    Scenario s = inst.scenarios[0];
    s.b(0) = -0.1;
    inst.scenarios.push_back(s);
    inst.finalize();
    const auto start = std::chrono::steady_clock::now();
    const OracleResult tree = oracle_value(inst, 10, OracleMethod::Tree);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 10.0);
    const OracleResult rec = oracle_value(inst, 10, OracleMethod::Recursive);
    EXPECT_NEAR(tree.value, rec.value, tree.error_bound + rec.error_bound + 1e-6);
}

TEST(Benchmarks, GeneratorsAreDeterministic) {
    EXPECT_EQ(text_of(gen_random(3)), text_of(gen_random(3)));
    EXPECT_NE(text_of(gen_random(3)), text_of(gen_random(4)));
    const ReservoirParams rp;
    EXPECT_EQ(text_of(gen_reservoir(rp, 1)), text_of(gen_reservoir(rp, 1)));
    EXPECT_NE(text_of(gen_reservoir(rp, 1)), text_of(gen_reservoir(rp, 2)));
    const EdParams ep = micro_ed();
    EXPECT_EQ(text_of(gen_ed(ep, 1)), text_of(gen_ed(ep, 1)));
}

TEST(Benchmarks, ReservoirShape) {
    const ReservoirParams rp;
    const StationaryInstance inst = gen_reservoir(rp, 0);
    EXPECT_EQ(inst.n, 3 * rp.num_reservoirs + 1);
    EXPECT_EQ(inst.N(), rp.N);
    EXPECT_DOUBLE_EQ(inst.lambda, rp.lambda);
}

TEST(Benchmarks, ZeroInflowReservoir) {
    ReservoirParams rp;
    rp.zero_inflow = true;
    const StationaryInstance inst = gen_reservoir(rp, 5);
    for (int i = 0; i <= inst.N(); ++i)
        EXPECT_EQ(inst.scenario(i).b.head(rp.num_reservoirs).cwiseAbs().maxCoeff(), 0.0);
    // Without inflow every scenario is identical.
    for (int i = 2; i <= inst.N(); ++i) EXPECT_EQ(inst.scenario(i).b, inst.scenario(1).b);
}

TEST(Benchmarks, ZeroInflowMatchesDeterministicChain) {
    ReservoirParams rp;
    rp.num_reservoirs = 1;
    rp.N = 3;
    rp.lambda = 0.6;
    rp.zero_inflow = true;
    const StationaryInstance inst = gen_reservoir(rp, 2);
    StationaryInstance det = inst;
    det.scenarios.resize(1);
    det.finalize();
    const OracleResult a = oracle_value(inst, 6, OracleMethod::Tree);
    const OracleResult b = oracle_value(det, 6, OracleMethod::Tree);
    EXPECT_NEAR(a.value, b.value, 1e-7 * (1.0 + std::abs(b.value)));
}

TEST(BenchmarksProperty, OracleHorizonConsistency) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StationaryInstance inst = gen_random(seed);
        const OracleResult o5 = oracle_value(inst, 5);
        for (int H : {6, 8, 12}) {
            const OracleResult o = oracle_value(inst, H);
            EXPECT_LE(std::abs(o.value - o5.value), o5.error_bound + 1e-7) << "seed " << seed << " H " << H;
        }
    }
}

TEST(Benchmarks, EdShape) {
    const EdParams p;
    const HierarchicalInstance h = gen_ed(p, 7);
    EXPECT_EQ(h.top.n, p.generators + 2 * p.regions);
    EXPECT_EQ(h.top.N(), p.N1);
    EXPECT_EQ(h.lower.N2(), p.N2);
    EXPECT_DOUBLE_EQ(h.top.lambda, p.lambda);
    EXPECT_DOUBLE_EQ(h.eps_lo, p.eps_lo);
}

TEST(Benchmarks, EdMicroInstanceExactFormMatchesOracle) {
    const HierarchicalInstance h = gen_ed(micro_ed(), 3);
    const StationaryInstance c = combined_instance(h);
    const OracleResult o = oracle_value(c, 8, OracleMethod::Tree);
    RunConfig cfg;
    cfg.T = 4;
    cfg.epsilon = 0.5;
    cfg.max_iters = 300;
    const double lb = run_eddp_fast(c, cfg).records.back().lb_root;
    EXPECT_LE(lb, o.value + o.error_bound + 1e-6);
    EXPECT_GE(lb, o.value - 1e-4 * std::abs(o.value));
}

TEST(Benchmarks, EdMicroInstanceHddpNearExact) {
    const HierarchicalInstance h = gen_ed(micro_ed(), 3);
    RunConfig cfg;
    cfg.algo = Algo::Hddp;
    cfg.T = 4;
    cfg.epsilon = 0.5;
    cfg.max_iters = 60;
    cfg.seed = 2;
    const RunResult r = run_hddp(h, cfg);
    RunConfig exact_cfg = cfg;
    exact_cfg.max_iters = 300;
    const double exact = run_eddp_fast(combined_instance(h), exact_cfg).records.back().lb_root;
    EXPECT_NEAR(r.records.back().lb_root, exact, hddp_reported_bound(h, r, h.eps_lo));
}
