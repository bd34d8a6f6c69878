#include "eddp/engine.hpp"
#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "lp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eddp {

namespace {

// Cut rows are added lazily: most LPs only need the few cuts active near the
// optimum, and the dense basis inverse grows quadratically with the row count.
constexpr int kCutsPerRound = 16;

struct StageLp {
    detail::LpBuilder b;
    int first_stage_row = 0;
    int num_stage_rows = 0;
    double constant = 0.0;
};

StageLp stage_lp(const StationaryInstance& inst, const LinearConstraintBlock& blk, int scenario_index) {
    StageLp s;
    for (int j = 0; j < inst.n; ++j) s.b.add_var(blk.lower(j), blk.upper(j), 0.0);
    s.first_stage_row = s.b.add_block(blk, 0);
    s.num_stage_rows = blk.num_rows();
    detail::add_piecewise_cost(s.b, inst.scenario(scenario_index).cost, 0, 1.0, s.constant);
    return s;
}

} // namespace

SubproblemResult solve_subproblem(const StationaryInstance& inst, const LowerModel& lower, int scenario_index,
                                  const Eigen::VectorXd& x_prev) {
    if (lower.dim() != inst.n) throw DimensionError("lower model dimension differs from the instance");
    const LinearConstraintBlock blk = stage_feasible_set(inst, scenario_index, x_prev);
    const auto& cuts = lower.cuts();
    std::vector<char> in_lp(cuts.size(), 0);
    std::vector<int> active;

    for (;;) {
        StageLp s = stage_lp(inst, blk, scenario_index);
        const int theta = s.b.add_var(lower.v0(), kInf, inst.lambda);
        for (int l : active) {
            const Cut& c = cuts[static_cast<std::size_t>(l)];
            std::vector<std::pair<int, double>> row{{theta, 1.0}};
            for (int j = 0; j < inst.n; ++j)
                if (c.gradient(j) != 0.0) row.emplace_back(j, -c.gradient(j));
            s.b.add_row(std::move(row), RowSense::Greater, c.constant());
        }
        const LpSolution sol = solve_lp(s.b.build());
        if (sol.status == LpStatus::Infeasible)
            throw SubproblemInfeasible("stage " + std::to_string(scenario_index) +
                                       " has no feasible decision (recourse assumption violated)");
        if (sol.status != LpStatus::Optimal) throw NumericalFailure("stage subproblem is unbounded");

        const Eigen::VectorXd x = sol.x.head(inst.n);
        const double th = sol.x(theta);
        const double tol = 1e-9 * (1.0 + std::abs(th));
        std::vector<std::pair<double, int>> violated;
        for (std::size_t l = 0; l < cuts.size(); ++l) {
            if (in_lp[l]) continue;
            const double viol = cuts[l].value(x) - th;
            if (viol > tol) violated.emplace_back(-viol, static_cast<int>(l));
        }
        if (violated.empty()) {
            SubproblemResult r;
            r.x = x;
            r.value = sol.objective_value + s.constant;
            Eigen::VectorXd sens(s.num_stage_rows);
            for (int k = 0; k < s.num_stage_rows; ++k) sens(k) = s.b.sensitivity(sol, s.first_stage_row + k);
            r.subgradient = blk.coupling.transpose() * sens;
            r.inner_iters = sol.iterations;
            return r;
        }
        std::sort(violated.begin(), violated.end());
        const std::size_t take = std::min<std::size_t>(violated.size(), kCutsPerRound);
        for (std::size_t k = 0; k < take; ++k) {
            in_lp[static_cast<std::size_t>(violated[k].second)] = 1;
            active.push_back(violated[k].second);
        }
    }
}

double solve_upper_subproblem(const StationaryInstance& inst, const UpperModel& upper, int scenario_index,
                              const Eigen::VectorXd& x_prev) {
    if (upper.dim() != inst.n) throw DimensionError("upper model dimension differs from the instance");
    const LinearConstraintBlock blk = stage_feasible_set(inst, scenario_index, x_prev);

    // Constant branch: Vbar replaced by vbar0.
    double best;
    {
        StageLp s = stage_lp(inst, blk, scenario_index);
        const LpSolution sol = solve_lp(s.b.build());
        if (sol.status == LpStatus::Infeasible) throw SubproblemInfeasible("upper subproblem has no feasible decision");
        if (sol.status != LpStatus::Optimal) throw NumericalFailure("upper subproblem is unbounded");
        best = sol.objective_value + s.constant + inst.lambda * upper.vbar0();
    }
    if (upper.total_points() == 0) return best;

    // Interpolation branch: Vbar replaced by (1/N) sum_i u_i, each u_i in primal form.
    StageLp s = stage_lp(inst, blk, scenario_index);
    const int N = upper.num_scenarios();
    const double w = inst.lambda / N;
    for (int i = 1; i <= N; ++i) {
        const auto& pts = upper.points(i);
        if (pts.empty()) {
            s.constant += w * upper.vbar0();
            continue;
        }
        const int K = static_cast<int>(pts.size());
        const int s0 = s.b.num_vars();
        for (const auto& p : pts) s.b.add_var(0.0, kInf, w * p.value);
        const int t = s.b.add_var(0.0, kInf, w * upper.slope_cap());
        std::vector<std::pair<int, double>> simplex;
        for (int j = 0; j < K; ++j) simplex.emplace_back(s0 + j, 1.0);
        s.b.add_row(std::move(simplex), RowSense::Equal, 1.0);
        for (int c = 0; c < inst.n; ++c) {
            // t >= +-(y_c - sum_j s_j x_jc)
            std::vector<std::pair<int, double>> up{{t, 1.0}, {c, -1.0}}, down{{t, 1.0}, {c, 1.0}};
            for (int j = 0; j < K; ++j) {
                const double v = pts[static_cast<std::size_t>(j)].x(c);
                if (v != 0.0) {
                    up.emplace_back(s0 + j, v);
                    down.emplace_back(s0 + j, -v);
                }
            }
            s.b.add_row(std::move(up), RowSense::Greater, 0.0);
            s.b.add_row(std::move(down), RowSense::Greater, 0.0);
        }
    }
    const LpSolution sol = solve_lp(s.b.build());
    if (sol.status != LpStatus::Optimal) throw NumericalFailure("upper interpolation subproblem did not solve");
    return std::min(best, sol.objective_value + s.constant);
}

} // namespace eddp
