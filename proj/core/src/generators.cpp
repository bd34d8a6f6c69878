#include "eddp/generators.hpp"

#include "eddp/errors.hpp"
#include "eddp/rng.hpp"

#include <cmath>

namespace eddp {

StationaryInstance make_chain_instance() {
    StationaryInstance inst;
    inst.n = 1;
    inst.lambda = 0.5;
    inst.lower = Eigen::VectorXd::Zero(1);
    inst.upper = Eigen::VectorXd::Ones(1);
    inst.x0 = Eigen::VectorXd::Ones(1);
    Scenario s;
    s.A = Eigen::MatrixXd::Ones(1, 1);
    s.B = Eigen::MatrixXd::Constant(1, 1, 0.5);
    s.b = Eigen::VectorXd::Zero(1);
    s.kinds = {RowKind::GreaterEqual};
    s.Q.resize(0, 1);
    s.R.resize(0, 1);
    s.r.resize(0);
    s.cost = PiecewiseLinearCost::affine(Eigen::VectorXd::Ones(1), 0.0);
    inst.scenario0 = s;
    inst.scenarios = {s};
    inst.finalize();
    return inst;
}

namespace {

Scenario empty_phi(Scenario s, int n) {
    s.Q.resize(0, n);
    s.R.resize(0, n);
    s.r.resize(0);
    return s;
}

} // namespace

StationaryInstance gen_random(std::uint64_t seed) {
    Rng rng(seed);
    StationaryInstance inst;
    const int n = rng.integer(1, 2);
    const int N = rng.integer(1, 3);
    inst.n = n;
    inst.lambda = rng.uniform(0.3, 0.6);
    inst.lower = Eigen::VectorXd::Zero(n);
    inst.upper = Eigen::VectorXd::Ones(n);
    inst.x0 = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) inst.x0(j) = rng.uniform(0.2, 1.0);
    const double base = rng.uniform(0.5, 1.5);

    auto make = [&]() {
        Scenario s;
        const int m = n == 2 ? 3 : 1;
        s.A = Eigen::MatrixXd::Zero(m, n);
        s.B = Eigen::MatrixXd::Zero(m, n);
        s.b = Eigen::VectorXd::Zero(m);
        s.kinds.assign(static_cast<std::size_t>(m), RowKind::GreaterEqual);
        for (int j = 0; j < n; ++j) {
            s.A(j, j) = 1.0;
            s.B(j, j) = rng.uniform(0.3, 0.9);
            s.b(j) = rng.uniform(-0.3, 0.1);
        }
        if (n == 2) {
            // x1 + x2 >= mu (x1_prev + x2_prev) + nu, at most 1.5 on the box
            s.A.row(2).setOnes();
            const double mu = rng.uniform(0.2, 0.6);
            s.B.row(2).setConstant(mu);
            s.b(2) = rng.uniform(-0.3, 0.3);
        }
        const int pieces = rng.integer(1, 3);
        s.cost.gradients.resize(pieces, n);
        s.cost.offsets.resize(pieces);
        for (int p = 0; p < pieces; ++p) {
            for (int j = 0; j < n; ++j) s.cost.gradients(p, j) = p == 0 ? rng.uniform(0.2, 2.0) : rng.uniform(-1.0, 2.0);
            s.cost.offsets(p) = base + (p == 0 ? 0.0 : rng.uniform(-1.0, 0.2));
        }
        return empty_phi(s, n);
    };
    inst.scenario0 = make();
    for (int i = 0; i < N; ++i) inst.scenarios.push_back(make());
    inst.finalize();
    return inst;
}

StationaryInstance gen_reservoir(const ReservoirParams& p, std::uint64_t seed) {
    if (p.num_reservoirs < 1 || p.N < 1) throw ConfigError("reservoir generator needs n >= 1 and N >= 1");
    Rng rng(seed);
    const int r = p.num_reservoirs;
    const int n = 3 * r + 1;
    const int L = 0, U = r, S = 2 * r, G = 3 * r;
    const double demand = p.demand > 0.0 ? p.demand : 0.6 * r * p.max_release;
    const double spill_cap = p.capacity + p.max_inflow;

    StationaryInstance inst;
    inst.n = n;
    inst.lambda = p.lambda;
    inst.lower = Eigen::VectorXd::Zero(n);
    inst.upper.resize(n);
    inst.upper.segment(L, r).setConstant(p.capacity);
    inst.upper.segment(U, r).setConstant(p.max_release);
    inst.upper.segment(S, r).setConstant(spill_cap);
    inst.upper(G) = demand;
    inst.x0 = Eigen::VectorXd::Zero(n);
    inst.x0.segment(L, r).setConstant(0.5 * p.capacity);

    // Thermal cost: marginal cost 1, 2, 4 on thirds of the demand.
    PiecewiseLinearCost cost;
    const double marg[3] = {1.0, 2.0, 4.0};
    cost.gradients = Eigen::MatrixXd::Zero(3, n);
    cost.offsets.resize(3);
    double kink = 0.0, prev_val = 0.0;
    for (int k = 0; k < 3; ++k) {
        cost.gradients(k, G) = marg[k];
        cost.gradients.block(k, S, 1, r).setConstant(p.spill_penalty);
        // Continuous at the breakpoints k * demand / 3.
        cost.offsets(k) = prev_val - marg[k] * kink;
        const double next_kink = (k + 1) * demand / 3.0;
        prev_val += marg[k] * (next_kink - kink);
        kink = next_kink;
    }

    auto make = [&](const Eigen::VectorXd& inflow) {
        Scenario s;
        s.A = Eigen::MatrixXd::Zero(r + 1, n);
        s.B = Eigen::MatrixXd::Zero(r + 1, n);
        s.b = Eigen::VectorXd::Zero(r + 1);
        for (int j = 0; j < r; ++j) {
            s.A(j, L + j) = 1.0;
            s.A(j, U + j) = 1.0;
            s.A(j, S + j) = 1.0;
            s.B(j, L + j) = 1.0;
            s.b(j) = inflow(j);
            s.kinds.push_back(RowKind::Equality);
        }
        s.A.block(r, U, 1, r).setOnes();
        s.A(r, G) = 1.0;
        s.b(r) = demand;
        s.kinds.push_back(RowKind::GreaterEqual);
        s.cost = cost;
        return empty_phi(s, n);
    };
    inst.scenario0 = make(Eigen::VectorXd::Constant(r, p.zero_inflow ? 0.0 : 0.5 * p.max_inflow));
    for (int i = 0; i < p.N; ++i) {
        Eigen::VectorXd inflow(r);
        for (int j = 0; j < r; ++j) inflow(j) = p.zero_inflow ? 0.0 : rng.uniform(0.0, p.max_inflow);
        inst.scenarios.push_back(make(inflow));
    }
    inst.finalize();
    return inst;
}

HierarchicalInstance gen_ed(const EdParams& p, std::uint64_t seed) {
    if (p.generators < 1 || p.regions < 1 || p.N1 < 1 || p.N2 < 1) throw ConfigError("invalid dispatch parameters");
    if (p.generators < p.regions) throw ConfigError("every region needs at least one generator");
    Rng rng(seed);
    const int ng = p.generators, r = p.regions;
    const int n = ng + 2 * r;
    const int Gb = 0, Bb = ng, Sb = ng + r;

    Eigen::VectorXd beta(r), alpha(r), price(ng);
    for (int k = 0; k < r; ++k) beta(k) = rng.uniform(p.beta_lo, p.beta_hi);
    for (int k = 0; k < r; ++k) alpha(k) = rng.uniform(p.alpha_lo, p.alpha_hi);
    for (int i = 0; i < ng; ++i) price(i) = rng.uniform(p.c_lo, p.c_hi);

    HierarchicalInstance h;
    StationaryInstance& top = h.top;
    top.n = n;
    top.lambda = p.lambda;
    top.lower = Eigen::VectorXd::Zero(n);
    top.upper.resize(n);
    top.upper.segment(Gb, ng).setConstant(p.g_max);
    top.upper.segment(Bb, r).setConstant(p.b_max);
    top.upper.segment(Sb, r).setConstant(p.h_max);
    top.x0 = Eigen::VectorXd::Zero(n);
    top.x0.segment(Bb, r).setConstant(0.5 * p.b_max);

    Eigen::VectorXd top_grad = Eigen::VectorXd::Zero(n);
    top_grad.segment(Gb, ng) = price;
    auto make_top = [&](const Eigen::VectorXd& demand) {
        Scenario s;
        s.A = Eigen::MatrixXd::Zero(r, n);
        s.B = Eigen::MatrixXd::Zero(r, n);
        s.b = demand;
        s.kinds.assign(static_cast<std::size_t>(r), RowKind::Equality);
        for (int i = 0; i < ng; ++i) s.A(i % r, Gb + i) = 1.0;
        for (int k = 0; k < r; ++k) {
            s.A(k, Bb + k) = -1.0;
            s.A(k, Sb + k) = -1.0;
            s.B(k, Bb + k) = -beta(k);
        }
        s.cost = PiecewiseLinearCost::affine(top_grad, 0.0);
        return empty_phi(s, n);
    };
    auto draw_demand = [&]() {
        Eigen::VectorXd d(r);
        for (int k = 0; k < r; ++k) d(k) = rng.uniform(p.d_lo, p.d_hi);
        return d;
    };
    top.scenario0 = make_top(Eigen::VectorXd::Constant(r, 0.5 * (p.d_lo + p.d_hi)));
    for (int i = 0; i < p.N1; ++i) top.scenarios.push_back(make_top(draw_demand()));

    TwoStageLowerLevel& lo = h.lower;
    const int N2 = p.N2;
    lo.n1 = r * N2;
    lo.A1 = Eigen::MatrixXd::Zero(r, lo.n1);
    lo.B1 = Eigen::MatrixXd::Zero(r, n);
    lo.b1 = Eigen::VectorXd::Zero(r);
    lo.kinds1.assign(static_cast<std::size_t>(r), RowKind::Equality);
    for (int k = 0; k < r; ++k) {
        for (int l = 0; l < N2; ++l) lo.A1(k, l * r + k) = 1.0 / N2;
        lo.B1(k, Sb + k) = 1.0;
    }
    lo.lower1 = Eigen::VectorXd::Zero(lo.n1);
    lo.upper1 = Eigen::VectorXd::Constant(lo.n1, p.h_max);
    lo.cost1 = PiecewiseLinearCost::zero(lo.n1);
    const double fmax = std::max(p.D_hi, alpha.sum() * p.h_max);
    for (int l = 0; l < N2; ++l) {
        const double D = rng.uniform(p.D_lo, p.D_hi);
        SecondStageSample s;
        // f >= D - alpha'h^l  and  f >= alpha'h^l - D
        s.A = Eigen::MatrixXd::Ones(2, 1);
        s.B = Eigen::MatrixXd::Zero(2, lo.n1);
        s.B.block(0, l * r, 1, r) = -alpha.transpose();
        s.B.block(1, l * r, 1, r) = alpha.transpose();
        s.b.resize(2);
        s.b << D, -D;
        s.kinds = {RowKind::GreaterEqual, RowKind::GreaterEqual};
        s.lower = Eigen::VectorXd::Zero(1);
        s.upper = Eigen::VectorXd::Constant(1, fmax);
        s.cost = PiecewiseLinearCost::affine(Eigen::VectorXd::Constant(1, p.penalty), 0.0);
        lo.samples.push_back(std::move(s));
    }
    lo.subgradient_bound = p.penalty * alpha.norm() * (1.0 + 1e-9);
    h.eps_lo = p.eps_lo;
    h.rho = p.rho;
    h.finalize();
    return h;
}

} // namespace eddp
