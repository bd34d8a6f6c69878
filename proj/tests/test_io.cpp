#include "eddp/errors.hpp"
#include "eddp/generators.hpp"
#include "eddp/instance_io.hpp"
#include "eddp/trace_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace eddp;

namespace {

void expect_same_scenario(const Scenario& a, const Scenario& b) {
    EXPECT_EQ(a.A, b.A);
    EXPECT_EQ(a.B, b.B);
    EXPECT_EQ(a.b, b.b);
    EXPECT_EQ(a.kinds, b.kinds);
    EXPECT_EQ(a.Q, b.Q);
    EXPECT_EQ(a.R, b.R);
    EXPECT_EQ(a.r, b.r);
    EXPECT_EQ(a.cost.gradients, b.cost.gradients);
    EXPECT_EQ(a.cost.offsets, b.cost.offsets);
}

void expect_same_instance(const StationaryInstance& a, const StationaryInstance& b) {
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
    EXPECT_EQ(a.x0, b.x0);
    ASSERT_EQ(a.N(), b.N());
    for (int i = 0; i <= a.N(); ++i) expect_same_scenario(a.scenario(i), b.scenario(i));
}

StationaryInstance roundtrip(const StationaryInstance& inst) {
    std::stringstream ss;
    write_instance(ss, inst);
    return parse_instance(ss);
}

} // namespace

TEST(InstanceIo, RandomRoundtrip) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const StationaryInstance inst = gen_random(seed);
        expect_same_instance(inst, roundtrip(inst));
    }
}

TEST(InstanceIo, ReservoirRoundtrip) {
    const StationaryInstance inst = gen_reservoir(ReservoirParams{}, 4);
    expect_same_instance(inst, roundtrip(inst));
}

TEST(InstanceIo, PhiRowsRoundtrip) {
    StationaryInstance inst = make_chain_instance();
    Scenario& s = inst.scenarios[0];
    s.Q = Eigen::MatrixXd::Constant(1, 1, 0.1);
    s.R = Eigen::MatrixXd::Constant(1, 1, 1.0 / 3.0);
    s.r = Eigen::VectorXd::Constant(1, -2.0);
    inst.finalize();
    expect_same_instance(inst, roundtrip(inst));
}

TEST(InstanceIo, HierarchicalRoundtrip) {
    EdParams p;
    p.generators = 3;
    p.regions = 2;
    p.N1 = 3;
    p.N2 = 2;
    const HierarchicalInstance h = gen_ed(p, 9);
    std::stringstream ss;
    write_hierarchical(ss, h);
    const HierarchicalInstance g = parse_hierarchical(ss);
    expect_same_instance(h.top, g.top);
    EXPECT_EQ(h.lower.n1, g.lower.n1);
    EXPECT_EQ(h.lower.A1, g.lower.A1);
    EXPECT_EQ(h.lower.B1, g.lower.B1);
    EXPECT_EQ(h.lower.b1, g.lower.b1);
    EXPECT_EQ(h.lower.subgradient_bound, g.lower.subgradient_bound);
    ASSERT_EQ(h.lower.N2(), g.lower.N2());
    for (int j = 0; j < h.lower.N2(); ++j) {
        EXPECT_EQ(h.lower.samples[j].A, g.lower.samples[j].A);
        EXPECT_EQ(h.lower.samples[j].B, g.lower.samples[j].B);
        EXPECT_EQ(h.lower.samples[j].b, g.lower.samples[j].b);
        EXPECT_EQ(h.lower.samples[j].cost.offsets, g.lower.samples[j].cost.offsets);
    }
    EXPECT_EQ(h.eps_lo, g.eps_lo);
    EXPECT_EQ(h.rho, g.rho);
}

TEST(InstanceIo, FileRoundtripAndKind) {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string a = (dir / "eddp_io_test_a.txt").string();
    const std::string b = (dir / "eddp_io_test_b.txt").string();
    save_instance(a, gen_random(1));
    EdParams p;
    p.generators = 2;
    p.regions = 1;
    p.N1 = 2;
    p.N2 = 2;
    save_hierarchical(b, gen_ed(p, 1));
    EXPECT_EQ(detect_instance_kind(a), InstanceKind::Stationary);
    EXPECT_EQ(detect_instance_kind(b), InstanceKind::Hierarchical);
    expect_same_instance(load_instance(a), gen_random(1));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(InstanceIo, WrongHeaderIsParseError) {
    std::istringstream in("not-an-instance 1\n");
    EXPECT_THROW(parse_instance(in), ParseError);
}

TEST(InstanceIo, TruncatedFileIsParseError) {
    std::stringstream ss;
    write_instance(ss, make_chain_instance());
    const std::string text = ss.str();
    std::istringstream in(text.substr(0, text.size() / 2));
    EXPECT_THROW(parse_instance(in), ParseError);
}

TEST(TraceIo, Roundtrip) {
    std::vector<IterationRecord> recs(3);
    for (int k = 0; k < 3; ++k) {
        recs[k].iter = k + 1;
        recs[k].lb_root = 0.1 * (k + 1) + 1.0 / 3.0;
        recs[k].selected = k % 2;
        recs[k].cuts_total = k + 1;
    }
    recs[1].ub_model = 2.5;
    recs[2].ub_policy = 1.0 / 7.0;
    recs[2].t_star = 2;
    recs[0].eps_c_max = 1e-3;
    recs[0].pdsa_iters = 400;
    std::stringstream ss;
    write_trace(ss, recs, true);
    const auto back = read_trace(ss);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t k = 0; k < recs.size(); ++k) {
        EXPECT_EQ(back[k].iter, recs[k].iter);
        EXPECT_EQ(back[k].lb_root, recs[k].lb_root);
        EXPECT_EQ(back[k].ub_model, recs[k].ub_model);
        EXPECT_EQ(back[k].ub_policy, recs[k].ub_policy);
        EXPECT_EQ(back[k].t_star, recs[k].t_star);
        EXPECT_EQ(back[k].selected, recs[k].selected);
        EXPECT_EQ(back[k].cuts_total, recs[k].cuts_total);
        EXPECT_EQ(back[k].eps_c_max, recs[k].eps_c_max);
        EXPECT_EQ(back[k].pdsa_iters, recs[k].pdsa_iters);
    }
}

TEST(TraceIo, HeaderColumns) {
    std::ostringstream os;
    write_trace(os, {});
    EXPECT_EQ(os.str(), "iter,lb_root,ub_model,ub_policy,t_star,selected,wall_ms,cuts_total\n");
}

TEST(TraceIo, MalformedRowIsParseError) {
    std::istringstream in("iter,lb_root,ub_model,ub_policy,t_star,selected,wall_ms,cuts_total\n1,x,,,,0,,1\n");
    EXPECT_THROW(read_trace(in), ParseError);
}
