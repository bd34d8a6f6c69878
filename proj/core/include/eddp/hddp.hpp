#pragma once

#include "eddp/cuts.hpp"
#include "eddp/engine.hpp"
#include "eddp/model.hpp"
#include "eddp/pdsa.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace eddp {

/**
 * Saddle form of stage `scenario_index` of a hierarchical instance. The
 * primal block is (x, z1) over the top box times the lower first-stage box.
 * Rows, in order: top stage rows [A_i, 0] (u = x_prev through B_i), phi rows
 * [-R_i, 0] >= r_i - Q_i x_prev, lower rows [-B1, A1] (kinds1) b1.
 * Sample j of the sampled term is lambda * lower(x) + v2_j(z1); its oracle
 * solves one second-stage LP. Throws DimensionError, IndexError, OutOfDomain.
 */
SaddleProblem build_saddle(const HierarchicalInstance& hinst, int scenario_index, const Eigen::VectorXd& x_prev,
                           const LowerModel& lower);

/**
 * ceil(||W|| (y0^2 + cap^2 + D_X^2) / eps_lo
 *      + D_X^2 G^2 (ln(6T/rho)^2 + n^2 ln(ratio)^2) / eps_lo^2),
 * with ratio = D sqrt(n) / epsilon. Returned as a double so huge values do not overflow.
 */
double pdsa_budget_formula(double W_norm, double y0_norm, double y_cap, double D_X, double G_bar, int T, double rho,
                           int n, double ratio, double eps_lo);

/// Budget of every stage solve, capped by cfg.max_pdsa_iters.
long pdsa_budget(const HierarchicalInstance& hinst, const RunConfig& cfg);

/// rho / (2 T (ratio - 1)^n), the per-subproblem failure probability of the budget.
double pdsa_failure_probability(double rho, int T, double ratio, int n);

/// Stage solver running PDSA on build_saddle, with optional periodic exact LP solves.
class HddpStageSolver : public StageSolver {
public:
    HddpStageSolver(const HierarchicalInstance& hinst, const RunConfig& cfg);

    SubproblemResult solve(int scenario_index, const Eigen::VectorXd& x_prev, const LowerModel& lower,
                           std::uint64_t seed, int iteration) const override;

    long budget() const { return budget_; }

private:
    const HierarchicalInstance& h_;
    RunConfig cfg_;
    long budget_;
    double confidence_;
    std::optional<StationaryInstance> combined_;
};

/// Fast loop on the top level with PDSA stage solves. Requires cfg.seed.
RunResult run_hddp(const HierarchicalInstance& hinst, const RunConfig& cfg);

/// eps_0 + (2 + M_D) eps_lo / (1 - lambda) for a finished run.
double hddp_reported_bound(const HierarchicalInstance& hinst, const RunResult& result, double eps_lo);

} // namespace eddp
