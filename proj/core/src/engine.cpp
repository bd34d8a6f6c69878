#include "eddp/engine.hpp"

#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "eddp/parallel.hpp"
#include "eddp/rng.hpp"
#include "eddp/saturation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace eddp {

const char* to_string(Algo a) {
    switch (a) {
    case Algo::Eddp: return "eddp";
    case Algo::EddpFast: return "eddp-fast";
    case Algo::EddpLu: return "eddp-lu";
    case Algo::Sddp: return "sddp";
    case Algo::Hddp: return "hddp";
    }
    return "?";
}

Algo parse_algo(const std::string& name) {
    std::string s = name;
    std::replace(s.begin(), s.end(), '_', '-');
    if (s == "eddp") return Algo::Eddp;
    if (s == "eddp-fast") return Algo::EddpFast;
    if (s == "eddp-lu") return Algo::EddpLu;
    if (s == "sddp") return Algo::Sddp;
    if (s == "hddp") return Algo::Hddp;
    throw ConfigError("unknown algorithm '" + name + "'");
}

const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Terminated: return "terminated";
    case RunStatus::MaxIters: return "max_iters";
    case RunStatus::Stalled: return "stalled";
    }
    return "?";
}

std::vector<double> compute_epsilon_schedule(int T, double lambda, double MhD, double increment) {
    if (T < 2) throw ConfigError("T must be at least 2");
    std::vector<double> eps(static_cast<std::size_t>(T));
    eps[static_cast<std::size_t>(T - 1)] = MhD / (1.0 - lambda);
    for (int t = T - 1; t >= 1; --t)
        eps[static_cast<std::size_t>(t - 1)] = increment + lambda * eps[static_cast<std::size_t>(t)];
    return eps;
}

std::vector<double> compute_epsilon_schedule(const RunConfig& cfg, const StationaryInstance& inst, double lipschitz_sum,
                                             double inexact_increment) {
    if (!(lipschitz_sum > 0.0)) throw ConfigError("Lipschitz estimate must be positive");
    return compute_epsilon_schedule(cfg.T, inst.lambda, inst.M_h * inst.D,
                                    lipschitz_sum * cfg.epsilon + inexact_increment);
}

std::vector<double> monotone_envelope(const std::vector<double>& eps) {
    std::vector<double> out = eps;
    for (std::size_t t = out.size() - 1; t-- > 0;) {
        const double cap = out[t + 1] - 1e-9 * std::max(1.0, std::abs(out[t + 1]));
        out[t] = std::min(out[t], cap);
    }
    return out;
}

namespace {

double grid_count(double D, int n, double epsilon) {
    return std::pow(D * std::sqrt(static_cast<double>(n)) / epsilon + 1.0, n);
}

} // namespace

double iteration_cap_eddp(int T, double D, int n, double epsilon) {
    return static_cast<double>(T) * (T - 1) * grid_count(D, n, epsilon);
}

double iteration_cap_fast(int T, double D, int n, double epsilon) {
    return 2.0 * (T - 1) * grid_count(D, n, epsilon) + (T + 1);
}

namespace {

using Clock = std::chrono::steady_clock;

void check_config(const StationaryInstance& inst, const RunConfig& cfg) {
    if (cfg.T < 2) throw ConfigError("T must be at least 2");
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > inst.D) throw ConfigError("epsilon must lie in (0, D]");
    if (cfg.max_iters < 1) throw ConfigError("max_iters must be positive");
    if (inst.N() < 1) throw ConfigError("at least one scenario is required");
}

bool same_point(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.size() == b.size() && a == b; }

double lipschitz_estimate(const StationaryInstance& inst, const RunConfig& cfg, const LowerModel& lower,
                          const UpperModel* upper) {
    if (cfg.lipschitz_sum > 0.0) return cfg.lipschitz_sum;
    const double lower_part = inst.M_h + inst.lambda * lower.max_gradient_norm();
    const double upper_part = upper ? inst.lambda * upper->M0bar() + inst.M_h : inst.M_h;
    return std::max(upper_part + lower_part, 1e-12);
}

struct Task {
    int scenario;
    Eigen::VectorXd x_prev;
};

std::vector<SubproblemResult> solve_all(const StageSolver& solver, const std::vector<Task>& tasks,
                                        const LowerModel& lower, const RunConfig& cfg, int k) {
    std::vector<SubproblemResult> out(tasks.size());
    const std::uint64_t master = cfg.seed.value_or(0);
    parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int t) {
        const auto& task = tasks[static_cast<std::size_t>(t)];
        out[static_cast<std::size_t>(t)] = solver.solve(task.scenario, task.x_prev, lower,
                                                        derive_seed(master, static_cast<std::uint64_t>(k),
                                                                    static_cast<std::uint64_t>(t)),
                                                        k);
    });
    return out;
}

void add_cut_from(LowerModel& lower, const std::vector<SubproblemResult>& res, int first, int N,
                  const Eigen::VectorXd& anchor, int k, bool slack_correction) {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> grads;
    values.reserve(static_cast<std::size_t>(N));
    grads.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        values.push_back(res[static_cast<std::size_t>(first + i)].value);
        grads.push_back(res[static_cast<std::size_t>(first + i)].subgradient);
    }
    double slack = 0.0;
    if (slack_correction) {
        for (int i = 0; i < N; ++i) slack += res[static_cast<std::size_t>(first + i)].eps_d;
        slack /= N;
    }
    lower.add_averaged_cut(values, grads, anchor, slack, k);
}

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void finish(RunResult& r, const StationaryInstance& inst, const RunConfig& cfg, double inexact_increment) {
    r.eps_schedule = compute_epsilon_schedule(cfg, inst, lipschitz_estimate(inst, cfg, r.lower, r.upper ? &*r.upper : nullptr),
                                              inexact_increment);
    if (cfg.policy_horizon > 0 && cfg.policy_rollouts > 0 && !r.records.empty())
        r.records.back().ub_policy =
            evaluate_policy(inst, r.lower, cfg.policy_horizon, cfg.policy_rollouts, cfg.seed.value_or(0), cfg.workers);
}

} // namespace

RunResult run_fast_loop(const StationaryInstance& inst, const RunConfig& cfg, const StageSolver& solver,
                        const LoopOptions& opt) {
    check_config(inst, cfg);
    const int N = inst.N();
    SaturationMap S(inst.lower, inst.upper, cfg.epsilon, cfg.T);
    RunResult r;
    r.lower = init_lower(inst);
    if (opt.with_upper) r.upper = init_upper(inst, cfg.M0bar > 0.0 ? cfg.M0bar : default_M0bar(inst));
    const double cap = iteration_cap_fast(cfg.T, inst.D, inst.n, cfg.epsilon);

    Eigen::VectorXd x_prev = inst.x0, x_nr = inst.x0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        if (k > cap) throw IterationOverflow("iteration " + std::to_string(k) + " exceeds the proven bound");
        const auto start = Clock::now();

        std::vector<Task> tasks;
        tasks.push_back({0, inst.x0});
        for (int i = 1; i <= N; ++i) tasks.push_back({i, x_prev});
        if (cfg.no_reset)
            for (int i = 1; i <= N; ++i) tasks.push_back({i, x_nr});
        const auto res = solve_all(solver, tasks, r.lower, cfg, k);

        std::vector<Eigen::VectorXd> candidates{res[0].x};
        const int cand_first = cfg.no_reset ? N + 1 : 1;
        for (int i = 0; i < N; ++i) candidates.push_back(res[static_cast<std::size_t>(cand_first + i)].x);

        IterationRecord rec;
        rec.iter = k;
        rec.lb_root = res[0].value;
        if (opt.record_inner) {
            double e = 0.0;
            long it = 0;
            for (const auto& s : res) {
                e = std::max(e, s.eps_c);
                it += s.inner_iters;
            }
            rec.eps_c_max = e;
            rec.pdsa_iters = it;
        }

        if (opt.with_upper) {
            // Gap levels use the models of iteration k-1; they are assigned
            // right after the subproblems, before the selection.
            UpperModel& up = *r.upper;
            const std::vector<double> eps = monotone_envelope(
                compute_epsilon_schedule(cfg, inst, lipschitz_estimate(inst, cfg, r.lower, &up), opt.inexact_increment));
            std::vector<double> gaps(res.size());
            std::vector<double> vhat(static_cast<std::size_t>(N));
            parallel_for(static_cast<int>(res.size()) + N, cfg.workers, [&](int t) {
                if (t < static_cast<int>(res.size())) {
                    const auto& x = res[static_cast<std::size_t>(t)].x;
                    gaps[static_cast<std::size_t>(t)] = std::max(0.0, up.evaluate(x) - r.lower.evaluate(x));
                } else {
                    const int i = t - static_cast<int>(res.size()) + 1;
                    vhat[static_cast<std::size_t>(i - 1)] = solve_upper_subproblem(inst, up, i, x_prev);
                }
            });
            for (std::size_t t = 0; t < res.size(); ++t) S.assign_gap_level(res[t].x, gaps[t], eps);
            for (int i = 1; i <= N; ++i) up.add_point(i, x_prev, vhat[static_cast<std::size_t>(i - 1)]);
        }

        add_cut_from(r.lower, res, 1, N, x_prev, k, opt.slack_correction);
        if (opt.with_upper) rec.ub_model = solve_upper_subproblem(inst, *r.upper, 0, inst.x0);

        const auto sel = S.select_most_distinguishable(candidates);
        rec.t_star = sel.level;
        rec.selected = sel.index;
        rec.cuts_total = r.lower.num_cuts();
        r.iterations = k;

        if (sel.level <= 1) {
            r.status = RunStatus::Terminated;
            r.x_final = res[0].x;
            if (cfg.timing) rec.wall_ms = elapsed_ms(start);
            r.records.push_back(rec);
            r.potential.push_back(S.potential_drop());
            break;
        }
        const Eigen::VectorXd x_next = candidates[static_cast<std::size_t>(sel.index)];
        if (cfg.no_reset) {
            std::vector<Eigen::VectorXd> nr(candidates.begin() + 1, candidates.end());
            x_nr = nr[static_cast<std::size_t>(S.select_most_distinguishable(nr).index)];
        }
        S.lower_level(x_prev, std::max(0, sel.level - 1));
        x_prev = x_next;
        r.x_final = res[0].x;
        if (cfg.timing) rec.wall_ms = elapsed_ms(start);
        r.records.push_back(rec);
        r.potential.push_back(S.potential_drop());
    }
    if (r.status != RunStatus::Terminated) r.status = RunStatus::MaxIters;
    finish(r, inst, cfg, opt.inexact_increment);
    return r;
}

RunResult run_eddp_fast(const StationaryInstance& inst, const RunConfig& cfg) {
    ExactStageSolver solver(inst);
    return run_fast_loop(inst, cfg, solver, LoopOptions{});
}

RunResult run_eddp_lu(const StationaryInstance& inst, const RunConfig& cfg) {
    ExactStageSolver solver(inst);
    LoopOptions opt;
    opt.with_upper = true;
    return run_fast_loop(inst, cfg, solver, opt);
}

namespace {

// Shared body of the reset-based variants (Algorithm 1 style EDDP and SDDP):
// all N+1 subproblems at x^{k-1}, plus one root solve at x0 when x^{k-1}
// differs from x0 so that lb_root is always the root bound.
struct ResetStep {
    std::vector<SubproblemResult> res;
    double lb_root;
};

ResetStep reset_step(const StationaryInstance& inst, const RunConfig& cfg, const StageSolver& solver,
                     const LowerModel& lower, const Eigen::VectorXd& x_prev, int k) {
    const int N = inst.N();
    std::vector<Task> tasks;
    for (int i = 0; i <= N; ++i) tasks.push_back({i, x_prev});
    const bool at_root = same_point(x_prev, inst.x0);
    if (!at_root) tasks.push_back({0, inst.x0});
    ResetStep s;
    s.res = solve_all(solver, tasks, lower, cfg, k);
    s.lb_root = at_root ? s.res[0].value : s.res.back().value;
    return s;
}

} // namespace

RunResult run_eddp(const StationaryInstance& inst, const RunConfig& cfg) {
    check_config(inst, cfg);
    const int N = inst.N();
    const int T = cfg.T;
    ExactStageSolver solver(inst);
    SaturationMap S(inst.lower, inst.upper, cfg.epsilon, T);
    RunResult r;
    r.lower = init_lower(inst);
    const double cap = iteration_cap_eddp(T, inst.D, inst.n, cfg.epsilon);

    Eigen::VectorXd x_prev = inst.x0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        if (k > cap) throw IterationOverflow("iteration " + std::to_string(k) + " exceeds the proven bound");
        const auto start = Clock::now();
        const ResetStep step = reset_step(inst, cfg, solver, r.lower, x_prev, k);
        add_cut_from(r.lower, step.res, 1, N, x_prev, k, false);

        std::vector<Eigen::VectorXd> candidates;
        for (int i = 0; i <= N; ++i) candidates.push_back(step.res[static_cast<std::size_t>(i)].x);
        const auto sel = S.select_most_distinguishable(candidates);

        IterationRecord rec;
        rec.iter = k;
        rec.lb_root = step.lb_root;
        rec.t_star = sel.level;
        rec.selected = sel.index;
        rec.cuts_total = r.lower.num_cuts();
        r.iterations = k;
        r.x_final = step.res[0].x;

        const bool done = sel.level <= 1 && k % T == 1;
        if (!done) {
            const Eigen::VectorXd x_next = k % T == 0 ? inst.x0 : candidates[static_cast<std::size_t>(sel.index)];
            S.lower_level(x_prev, std::max(0, sel.level - 1));
            x_prev = x_next;
        }
        if (cfg.timing) rec.wall_ms = elapsed_ms(start);
        r.records.push_back(rec);
        r.potential.push_back(S.potential_drop());
        if (done) {
            r.status = RunStatus::Terminated;
            break;
        }
    }
    if (r.status != RunStatus::Terminated) r.status = RunStatus::MaxIters;
    finish(r, inst, cfg, 0.0);
    return r;
}

RunResult run_sddp(const StationaryInstance& inst, const RunConfig& cfg) {
    check_config(inst, cfg);
    if (!cfg.seed) throw ConfigError("sddp requires a seed");
    const int N = inst.N();
    ExactStageSolver solver(inst);
    Rng rng(*cfg.seed);
    RunResult r;
    r.lower = init_lower(inst);

    Eigen::VectorXd x_prev = inst.x0;
    double best = -kInf;
    int flat = 0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        const auto start = Clock::now();
        const ResetStep step = reset_step(inst, cfg, solver, r.lower, x_prev, k);
        add_cut_from(r.lower, step.res, 1, N, x_prev, k, false);
        const int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(N + 1)));

        IterationRecord rec;
        rec.iter = k;
        rec.lb_root = step.lb_root;
        rec.selected = pick;
        rec.cuts_total = r.lower.num_cuts();
        if (cfg.timing) rec.wall_ms = elapsed_ms(start);
        r.records.push_back(rec);
        r.iterations = k;
        r.x_final = step.res[0].x;

        x_prev = k % cfg.T == 0 ? inst.x0 : step.res[static_cast<std::size_t>(pick)].x;

        if (step.lb_root > best + 1e-8 * (1.0 + std::abs(step.lb_root)))
            flat = 0;
        else
            ++flat;
        best = std::max(best, step.lb_root);
        if (cfg.stall_iters > 0 && flat >= cfg.stall_iters) {
            r.status = RunStatus::Stalled;
            break;
        }
    }
    if (r.status != RunStatus::Stalled) r.status = RunStatus::MaxIters;
    // The root solution is only computed at x0 when x^{k-1} = x0; refresh it.
    r.x_final = solve_subproblem(inst, r.lower, 0, inst.x0).x;
    finish(r, inst, cfg, 0.0);
    return r;
}

RunResult run(const StationaryInstance& inst, const RunConfig& cfg) {
    switch (cfg.algo) {
    case Algo::Eddp: return run_eddp(inst, cfg);
    case Algo::EddpFast: return run_eddp_fast(inst, cfg);
    case Algo::EddpLu: return run_eddp_lu(inst, cfg);
    case Algo::Sddp: return run_sddp(inst, cfg);
    case Algo::Hddp: break;
    }
    throw ConfigError("hddp runs on hierarchical instances");
}

double policy_tail_bound(const StationaryInstance& inst, int H) {
    double hmax = 0.0;
    for (int i = 1; i <= inst.N(); ++i) hmax = std::max(hmax, inst.scenario(i).cost.max_over_box(inst.lower, inst.upper));
    return std::pow(inst.lambda, H) * hmax / (1.0 - inst.lambda);
}

double evaluate_policy(const StationaryInstance& inst, const LowerModel& lower, int H, int rollouts, std::uint64_t seed,
                       int workers) {
    if (H < 1 || rollouts < 1) throw ConfigError("policy evaluation needs H >= 1 and rollouts >= 1");
    const LowerModel model = lower.dim() == inst.n ? lower : lower.padded(inst.n);
    const int N = inst.N();
    std::vector<double> totals(static_cast<std::size_t>(rollouts));
    parallel_for(rollouts, workers, [&](int r) {
        Rng rng(derive_seed(seed, 0x706f6c6963ULL, static_cast<std::uint64_t>(r)));
        Eigen::VectorXd x = inst.x0;
        double total = 0.0, disc = 1.0;
        for (int t = 1; t <= H; ++t) {
            const int i = t == 1 ? 0 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
            x = solve_subproblem(inst, model, i, x).x;
            total += disc * inst.scenario(i).cost.evaluate(x);
            disc *= inst.lambda;
        }
        totals[static_cast<std::size_t>(r)] = total;
    });
    double sum = 0.0;
    for (double v : totals) sum += v;
    return sum / rollouts + policy_tail_bound(inst, H);
}

} // namespace eddp
