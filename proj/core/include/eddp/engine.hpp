#pragma once

#include "eddp/cuts.hpp"
#include "eddp/model.hpp"
#include "eddp/upper.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eddp {

enum class Algo { Eddp, EddpFast, EddpLu, Sddp, Hddp };

const char* to_string(Algo a);
/// Accepts eddp, eddp-fast, eddp-lu, sddp, hddp (underscores allowed). Throws ConfigError.
Algo parse_algo(const std::string& name);

struct RunConfig {
    Algo algo = Algo::EddpFast;
    int T = 6;
    double epsilon = 0.05;
    int max_iters = 1000;
    std::optional<std::uint64_t> seed; ///< required by sddp and hddp
    int workers = 1;                   ///< 0 means hardware default
    bool no_reset = false;
    /// (M + M_lower) estimate; 0 selects the running heuristic M_h + lambda * max cut norm + M_h.
    double lipschitz_sum = 0.0;
    /// Greedy-policy rollouts recorded on the last iteration when both are positive.
    int policy_horizon = 0;
    int policy_rollouts = 0;
    /// Record wall-clock milliseconds per iteration (makes traces run-dependent).
    bool timing = false;
    /// Upper-model slope cap; 0 selects 2 M_h / (1 - lambda).
    double M0bar = 0.0;
    /// SDDP stall rule: stop after this many iterations improving less than 1e-8 (1 + |lb|).
    int stall_iters = 50;

    // Hierarchical options.
    double eps_lo = 0.0; ///< 0 keeps the instance value
    double rho = 0.0;    ///< 0 keeps the instance value
    long max_pdsa_iters = 20000;
    double dual_cap = 1.0;
    bool exact_cut_mode = false;
    int exact_cut_period = 25;
    /// Subtract the reported eps_d of each inexact solve from its cut.
    bool slack_correction = false;
};

struct IterationRecord {
    int iter = 0;
    double lb_root = 0.0;
    std::optional<double> ub_model;
    std::optional<double> ub_policy;
    std::optional<int> t_star;
    int selected = 0;
    std::optional<double> wall_ms;
    int cuts_total = 0;
    std::optional<double> eps_c_max;
    std::optional<long> pdsa_iters;
};

enum class RunStatus { Terminated, MaxIters, Stalled };
const char* to_string(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::MaxIters;
    Eigen::VectorXd x_final;
    std::vector<IterationRecord> records;
    LowerModel lower;
    std::optional<UpperModel> upper;
    /// eps_0 .. eps_{T-1} with the Lipschitz estimate at the last iteration.
    std::vector<double> eps_schedule;
    int iterations = 0;
    /// Sum over cells of (T - 1 - level) after every iteration (eddp family only).
    std::vector<long long> potential;
};

struct SubproblemResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd subgradient;
    double eps_c = 0.0;
    long inner_iters = 0;
    /// Reported bound on the value error of an inexact solve (0 when exact).
    double eps_d = 0.0;
};

/**
 * Exact stage subproblem: min h_i(x) + lambda * theta over X(x_prev, i),
 * theta >= lower model. The subgradient with respect to x_prev is
 * [B_i; Q_i]' times the rhs sensitivities of the stage rows.
 * Throws SubproblemInfeasible when X(x_prev, i) is empty.
 */
SubproblemResult solve_subproblem(const StationaryInstance& inst, const LowerModel& lower, int scenario_index,
                                  const Eigen::VectorXd& x_prev);

/// min h_i(x) + lambda * Vbar(x) over X(x_prev, i), Vbar the upper model.
double solve_upper_subproblem(const StationaryInstance& inst, const UpperModel& upper, int scenario_index,
                              const Eigen::VectorXd& x_prev);

/// Pluggable subproblem solver so inexact variants can reuse the fast loop.
class StageSolver {
public:
    virtual ~StageSolver() = default;
    /// `iteration` is the outer iteration k >= 1; `seed` is unique per (k, task).
    virtual SubproblemResult solve(int scenario_index, const Eigen::VectorXd& x_prev, const LowerModel& lower,
                                   std::uint64_t seed, int iteration) const = 0;
};

class ExactStageSolver : public StageSolver {
public:
    explicit ExactStageSolver(const StationaryInstance& inst) : inst_(inst) {}
    SubproblemResult solve(int i, const Eigen::VectorXd& x_prev, const LowerModel& lower, std::uint64_t,
                           int) const override {
        return solve_subproblem(inst_, lower, i, x_prev);
    }

private:
    const StationaryInstance& inst_;
};

/**
 * eps_{T-1} = MhD / (1 - lambda), eps_{t-1} = increment + lambda * eps_t,
 * where increment = (M + M_lower) * epsilon, plus (1 + M_D) eps_lo in the
 * inexact variant.
 */
std::vector<double> compute_epsilon_schedule(int T, double lambda, double MhD, double increment);
std::vector<double> compute_epsilon_schedule(const RunConfig& cfg, const StationaryInstance& inst,
                                             double lipschitz_sum, double inexact_increment = 0.0);
/// Largest strictly increasing schedule below the given one.
std::vector<double> monotone_envelope(const std::vector<double>& eps);

/// Hard iteration caps of the exact variants.
double iteration_cap_eddp(int T, double D, int n, double epsilon);
double iteration_cap_fast(int T, double D, int n, double epsilon);

RunResult run_eddp(const StationaryInstance& inst, const RunConfig& cfg);
RunResult run_eddp_fast(const StationaryInstance& inst, const RunConfig& cfg);
RunResult run_eddp_lu(const StationaryInstance& inst, const RunConfig& cfg);
RunResult run_sddp(const StationaryInstance& inst, const RunConfig& cfg);
/// Dispatches on cfg.algo (hddp is not accepted here).
RunResult run(const StationaryInstance& inst, const RunConfig& cfg);

struct LoopOptions {
    /// Added to the schedule increment; affects the reported schedule only.
    double inexact_increment = 0.0;
    /// Maintain the upper model and assign levels from the model gap.
    bool with_upper = false;
    /// Fill eps_c_max and pdsa_iters from the solver results.
    bool record_inner = false;
    /// Shift every cut down by the mean eps_d of the solves that produced it.
    bool slack_correction = false;
};

/// Fast-EDDP loop over an arbitrary subproblem solver.
RunResult run_fast_loop(const StationaryInstance& inst, const RunConfig& cfg, const StageSolver& solver,
                        const LoopOptions& options);

/**
 * Mean discounted cost of the greedy policy argmin h + lambda * lower over
 * `rollouts` sampled paths of `H` stages (stage 1 uses scenario 0, later
 * stages a uniform scenario in 1..N), plus the tail bound
 * lambda^H * max(0, max_i max_box h_i) / (1 - lambda).
 */
double evaluate_policy(const StationaryInstance& inst, const LowerModel& lower, int H, int rollouts,
                       std::uint64_t seed, int workers = 1);
double policy_tail_bound(const StationaryInstance& inst, int H);

} // namespace eddp
