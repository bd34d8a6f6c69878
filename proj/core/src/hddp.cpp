#include "eddp/hddp.hpp"

#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "lp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace eddp {

namespace {

struct SecondStageValue {
    double value;
    Eigen::VectorXd grad_z1;
};

SecondStageValue solve_second_stage(const SecondStageSample& s, const Eigen::VectorXd& z1) {
    detail::LpBuilder b;
    const int n2 = static_cast<int>(s.lower.size());
    for (int j = 0; j < n2; ++j) b.add_var(s.lower(j), s.upper(j), 0.0);
    double constant = 0.0;
    detail::add_piecewise_cost(b, s.cost, 0, 1.0, constant);
    const int m2 = static_cast<int>(s.b.size());
    const Eigen::VectorXd rhs = s.B * z1 + s.b;
    int first = -1;
    for (int i = 0; i < m2; ++i) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n2; ++j)
            if (s.A(i, j) != 0.0) row.emplace_back(j, s.A(i, j));
        const int h = b.add_row(std::move(row), detail::to_sense(s.kinds[static_cast<std::size_t>(i)]), rhs(i));
        if (i == 0) first = h;
    }
    const LpSolution sol = solve_lp(b.build());
    if (sol.status == LpStatus::Infeasible)
        throw SubproblemInfeasible("second-stage sample has no feasible decision");
    if (sol.status != LpStatus::Optimal) throw NumericalFailure("second-stage LP is unbounded");
    Eigen::VectorXd sens(m2);
    for (int i = 0; i < m2; ++i) sens(i) = b.sensitivity(sol, first + i);
    return {sol.objective_value + constant, s.B.transpose() * sens};
}

// Constraint rows of the saddle form; W does not depend on x_prev or the model.
void fill_rows(const HierarchicalInstance& h, int scenario_index, SaddleProblem& sp) {
    const Scenario& s = h.top.scenario(scenario_index);
    const TwoStageLowerLevel& lo = h.lower;
    const int n = h.top.n, n1 = lo.n1, d = n + n1;
    const int m = s.num_rows(), mphi = s.num_phi_rows(), m1 = static_cast<int>(lo.b1.size());
    const int rows = m + mphi + m1;
    sp.W = Eigen::MatrixXd::Zero(rows, d);
    sp.U = Eigen::MatrixXd::Zero(rows, n);
    sp.q = Eigen::VectorXd::Zero(rows);
    sp.nonneg.assign(static_cast<std::size_t>(rows), 1);
    if (m > 0) {
        sp.W.block(0, 0, m, n) = s.A;
        sp.U.topRows(m) = s.B;
        sp.q.head(m) = s.b;
    }
    for (int i = 0; i < m; ++i) sp.nonneg[static_cast<std::size_t>(i)] = s.kinds[static_cast<std::size_t>(i)] != RowKind::Equality;
    if (mphi > 0) {
        sp.W.block(m, 0, mphi, n) = -s.R;
        sp.U.middleRows(m, mphi) = -s.Q;
        sp.q.segment(m, mphi) = s.r;
    }
    if (m1 > 0) {
        sp.W.block(m + mphi, 0, m1, n) = -lo.B1;
        sp.W.block(m + mphi, n, m1, n1) = lo.A1;
        sp.q.tail(m1) = lo.b1;
    }
    for (int i = 0; i < m1; ++i)
        sp.nonneg[static_cast<std::size_t>(m + mphi + i)] = lo.kinds1[static_cast<std::size_t>(i)] != RowKind::Equality;
    sp.lower.resize(d);
    sp.upper.resize(d);
    sp.lower.head(n) = h.top.lower;
    sp.upper.head(n) = h.top.upper;
    sp.lower.tail(n1) = lo.lower1;
    sp.upper.tail(n1) = lo.upper1;
}

double ratio_of(const HierarchicalInstance& h, const RunConfig& cfg) {
    return h.top.D * std::sqrt(static_cast<double>(h.top.n)) / cfg.epsilon;
}

double eps_lo_of(const HierarchicalInstance& h, const RunConfig& cfg) { return cfg.eps_lo > 0.0 ? cfg.eps_lo : h.eps_lo; }
double rho_of(const HierarchicalInstance& h, const RunConfig& cfg) { return cfg.rho > 0.0 ? cfg.rho : h.rho; }

} // namespace

SaddleProblem build_saddle(const HierarchicalInstance& h, int scenario_index, const Eigen::VectorXd& x_prev,
                           const LowerModel& lower) {
    const int n = h.top.n, n1 = h.lower.n1;
    if (x_prev.size() != n) throw DimensionError("x_prev has wrong length");
    if (lower.dim() != n) throw DimensionError("lower model dimension differs from the top level");
    for (int j = 0; j < n; ++j)
        if (x_prev(j) < h.top.lower(j) - 1e-9 || x_prev(j) > h.top.upper(j) + 1e-9)
            throw OutOfDomain("x_prev outside the box");

    SaddleProblem sp;
    fill_rows(h, scenario_index, sp);
    sp.u = x_prev;
    sp.f = PiecewiseLinearCost::concat_sum(h.top.scenario(scenario_index).cost, h.lower.cost1);

    const double lambda = h.top.lambda;
    const TwoStageLowerLevel* lo = &h.lower;
    sp.num_samples = lo->N2();
    // Copies keep the oracle valid after the caller's model changes.
    auto model = std::make_shared<const LowerModel>(lower);
    sp.second_stage = [lo, model, lambda, n, n1](const Eigen::VectorXd& xz, int j) {
        const Eigen::VectorXd x = xz.head(n);
        const SecondStageValue v = solve_second_stage(lo->samples[static_cast<std::size_t>(j)], xz.tail(n1));
        StochasticSample s;
        s.value = lambda * model->evaluate(x) + v.value;
        s.subgradient.resize(n + n1);
        s.subgradient.head(n) = lambda * model->subgradient(x);
        s.subgradient.tail(n1) = v.grad_z1;
        return s;
    };
    sp.expected_value = [lo, model, lambda, n, n1](const Eigen::VectorXd& xz) {
        double acc = 0.0;
        for (const auto& smp : lo->samples) acc += solve_second_stage(smp, xz.tail(n1)).value;
        return lambda * model->evaluate(xz.head(n)) + (lo->N2() > 0 ? acc / lo->N2() : 0.0);
    };
    sp.G_bar = lo->subgradient_bound + lambda * lower.max_gradient_norm();
    return sp;
}

double pdsa_budget_formula(double W_norm, double y0_norm, double y_cap, double D_X, double G_bar, int T, double rho,
                           int n, double ratio, double eps_lo) {
    if (!(eps_lo > 0.0) || !(rho > 0.0) || T < 1 || n < 1 || !(ratio > 0.0))
        throw ConfigError("invalid PDSA budget inputs");
    const double l1 = std::log(6.0 * T / rho);
    const double l2 = static_cast<double>(n) * std::log(ratio);
    const double first = W_norm * (y0_norm * y0_norm + y_cap * y_cap + D_X * D_X) / eps_lo;
    const double second = D_X * D_X * G_bar * G_bar * (l1 * l1 + l2 * l2) / (eps_lo * eps_lo);
    return std::max(1.0, std::ceil(first + second));
}

long pdsa_budget(const HierarchicalInstance& h, const RunConfig& cfg) {
    if (cfg.max_pdsa_iters < 1) throw ConfigError("max_pdsa_iters must be positive");
    double wn = 0.0;
    SaddleProblem sp;
    for (int i = 0; i <= h.top.N(); ++i) {
        fill_rows(h, i, sp);
        wn = std::max(wn, spectral_norm(sp.W));
    }
    const double D_X = box_diameter(sp.lower, sp.upper);
    const double G = h.lower.subgradient_bound + h.top.lambda * h.M_D_value();
    const double b = pdsa_budget_formula(wn, 0.0, cfg.dual_cap, D_X, G, cfg.T, rho_of(h, cfg), h.top.n,
                                         ratio_of(h, cfg), eps_lo_of(h, cfg));
    return b >= static_cast<double>(cfg.max_pdsa_iters) ? cfg.max_pdsa_iters : static_cast<long>(b);
}

double pdsa_failure_probability(double rho, int T, double ratio, int n) {
    return rho / (2.0 * T * std::pow(ratio - 1.0, n));
}

HddpStageSolver::HddpStageSolver(const HierarchicalInstance& hinst, const RunConfig& cfg)
    : h_(hinst), cfg_(cfg), budget_(pdsa_budget(hinst, cfg)) {
    const double p = pdsa_failure_probability(rho_of(hinst, cfg), cfg.T, ratio_of(hinst, cfg), hinst.top.n);
    confidence_ = p > 0.0 && std::isfinite(p) ? std::max(3.0, std::log(2.0 / p)) : 3.0;
    if (cfg.exact_cut_mode) {
        if (cfg.exact_cut_period < 1) throw ConfigError("exact_cut_period must be positive");
        combined_ = combined_instance(hinst);
    }
}

SubproblemResult HddpStageSolver::solve(int i, const Eigen::VectorXd& x_prev, const LowerModel& lower,
                                        std::uint64_t seed, int iteration) const {
    const int n = h_.top.n;
    if (combined_ && iteration % cfg_.exact_cut_period == 0) {
        const StationaryInstance& c = *combined_;
        Eigen::VectorXd xp = c.lower;
        xp.head(n) = x_prev;
        SubproblemResult r = solve_subproblem(c, lower.padded(c.n), i, xp);
        r.x = r.x.head(n).eval();
        r.subgradient = r.subgradient.head(n).eval();
        r.inner_iters = 0;
        return r;
    }
    const SaddleProblem sp = build_saddle(h_, i, x_prev, lower);
    PdsaParams params = default_params(sp, budget_);
    params.dual_cap = cfg_.dual_cap;
    params.confidence = confidence_;
    const PdsaCertificate cert = run_pdsa(sp, params, seed);
    SubproblemResult r;
    r.x = cert.x_bar.head(n);
    r.value = cert.objective;
    r.subgradient = cert.u_subgradient;
    r.eps_c = cert.eps_c;
    r.eps_d = cert.eps_d;
    r.inner_iters = cert.iterations;
    return r;
}

RunResult run_hddp(const HierarchicalInstance& hinst, const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("hddp requires an explicit seed");
    if (eps_lo_of(hinst, cfg) > hinst.eps_regularity) throw ConfigError("eps_lo exceeds the declared regularity constant");
    HddpStageSolver solver(hinst, cfg);
    LoopOptions opt;
    opt.inexact_increment = (1.0 + hinst.M_D_value()) * eps_lo_of(hinst, cfg);
    opt.record_inner = true;
    opt.slack_correction = cfg.slack_correction;
    // The greedy policy is evaluated on the exact LP form, which carries the lower-level costs.
    RunConfig loop_cfg = cfg;
    loop_cfg.policy_horizon = 0;
    loop_cfg.policy_rollouts = 0;
    RunResult r = run_fast_loop(hinst.top, loop_cfg, solver, opt);
    if (cfg.policy_horizon > 0 && cfg.policy_rollouts > 0 && !r.records.empty())
        r.records.back().ub_policy = evaluate_policy(combined_instance(hinst), r.lower, cfg.policy_horizon,
                                                     cfg.policy_rollouts, *cfg.seed, cfg.workers);
    return r;
}

double hddp_reported_bound(const HierarchicalInstance& hinst, const RunResult& result, double eps_lo) {
    if (result.eps_schedule.empty()) throw ConfigError("run has no epsilon schedule");
    return result.eps_schedule.front() + (2.0 + hinst.M_D_value()) * eps_lo / (1.0 - hinst.top.lambda);
}

} // namespace eddp
