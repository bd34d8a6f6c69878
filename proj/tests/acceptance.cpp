// Acceptance checks. Run with --criterion k (1..9) or with no arguments for all.
// Prints one "criterion k: PASS|FAIL ..." line per check. Exit code 0 when every
// selected check passes, 1 on failure, 77 when a check cannot run on this host.

#include "eddp/cuts.hpp"
#include "eddp/engine.hpp"
#include "eddp/generators.hpp"
#include "eddp/hddp.hpp"
#include "eddp/lp.hpp"
#include "eddp/oracle.hpp"
#include "eddp/pdsa.hpp"
#include "eddp/rng.hpp"
#include "eddp/saturation.hpp"
#include "eddp/trace_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace eddp;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kSkip = 77;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int report(int k, bool ok, const std::string& detail) {
    std::cout << "criterion " << k << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
    return ok ? kPass : kFail;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Eigen::VectorXd random_point(Rng& rng, const StationaryInstance& inst) {
    Eigen::VectorXd x(inst.n);
    for (int j = 0; j < inst.n; ++j) x(j) = rng.uniform(inst.lower(j), inst.upper(j));
    return x;
}

// Random suite shared by criteria 1 and 2.
struct SuiteRun {
    std::uint64_t seed = 0;
    StationaryInstance inst;
    RunConfig cfg;
    RunResult result;
    double seconds = 0.0;
    double F_star = 0.0;
    double oracle_bound = 0.0;
    double F_final_upper = 0.0;
};

// T is the smallest horizon whose tail term is at most 2% of |F*|; epsilon is
// halved until the reported eps_0 is at most 5% of |F*|.
SuiteRun run_suite_instance(std::uint64_t seed) {
    SuiteRun s;
    s.seed = seed;
    s.inst = gen_random(seed);
    const StationaryInstance& inst = s.inst;
    const RecursiveOracle oracle(inst, 20);
    s.F_star = oracle.result().value;
    s.oracle_bound = oracle.result().error_bound;
    const double target = 0.05 * std::abs(s.F_star);
    const double MhD = inst.M_h * inst.D;
    int T = 2;
    while (std::pow(inst.lambda, T - 1) * MhD / (1.0 - inst.lambda) > 0.4 * target) ++T;
    double eps = 0.1;
    for (int attempt = 0; attempt < 12; ++attempt, eps *= 0.5) {
        s.cfg = RunConfig{};
        s.cfg.T = T;
        s.cfg.epsilon = std::min(eps, inst.D);
        s.cfg.max_iters = 1000000;
        const auto t0 = Clock::now();
        s.result = run_eddp_fast(inst, s.cfg);
        s.seconds = seconds_since(t0);
        if (s.result.eps_schedule.front() <= target) break;
    }
    // F(x) <= h0(x) + lambda W(x) + lambda * cost_to_go_bound.
    s.F_final_upper = oracle.objective(s.result.x_final) + inst.lambda * oracle.cost_to_go_bound();
    return s;
}

std::vector<SuiteRun>& suite() {
    static std::vector<SuiteRun> runs = [] {
        std::vector<SuiteRun> r;
        for (std::uint64_t seed = 0; seed < 20; ++seed) r.push_back(run_suite_instance(seed));
        return r;
    }();
    return runs;
}

int criterion1() {
    int ok = 0;
    double worst_excess = -1e300, slowest = 0.0;
    std::string first_bad;
    for (const auto& s : suite()) {
        const double eps0 = s.result.eps_schedule.front();
        const double gap = s.F_final_upper - s.F_star;
        const bool good = s.result.status == RunStatus::Terminated && eps0 <= 0.05 * std::abs(s.F_star) + 1e-12 &&
                          gap <= eps0 + s.oracle_bound && s.seconds < 60.0;
        worst_excess = std::max(worst_excess, gap - eps0 - s.oracle_bound);
        slowest = std::max(slowest, s.seconds);
        if (good) ++ok;
        else if (first_bad.empty()) first_bad = " first failure seed " + std::to_string(s.seed);
    }
    return report(1, ok == 20,
                  std::to_string(ok) + "/20 within eps0 + oracle bound; max (gap - eps0 - bound) " +
                      fmt("%.3g", worst_excess) + "; slowest run " + fmt("%.2f", slowest) + " s (limit 60)" +
                      first_bad);
}

int criterion2() {
    int ok = 0;
    double worst_ratio = 0.0;
    for (const auto& s : suite()) {
        const int T = s.cfg.T;
        const double bound = 2.0 * (T - 1) * std::pow(s.inst.D * std::sqrt(double(s.inst.n)) / s.cfg.epsilon + 1.0,
                                                      s.inst.n) + (T + 1);
        worst_ratio = std::max(worst_ratio, s.result.iterations / bound);
        if (s.result.iterations <= bound) ++ok;
    }
    return report(2, ok == 20,
                  std::to_string(ok) + "/20 runs within 2(T-1)(D sqrt(n)/eps+1)^n + T + 1; max iterations/bound " +
                      fmt("%.4f", worst_ratio));
}

int criterion3() {
    int ok = 0;
    double worst_lower = -1e300, worst_upper = -1e300;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const StationaryInstance inst = gen_random(seed);
        RunConfig cfg;
        cfg.T = 6;
        cfg.epsilon = 0.01;
        cfg.max_iters = 50;
        const RunResult r = run_eddp_lu(inst, cfg);
        const RecursiveOracle oracle(inst, 20);
        Rng rng(1000 + seed);
        bool good = r.upper.has_value();
        for (int p = 0; p < 50 && good; ++p) {
            const Eigen::VectorXd x = random_point(rng, inst);
            const double W = oracle.cost_to_go(x);
            // W <= V <= W + bound.
            const double lo_excess = r.lower.evaluate(x) - (W + oracle.cost_to_go_bound());
            const double up_excess = W - r.upper->evaluate(x);
            worst_lower = std::max(worst_lower, lo_excess);
            worst_upper = std::max(worst_upper, up_excess);
            good = lo_excess <= 1e-6 && up_excess <= 1e-6;
        }
        if (good) ++ok;
    }
    return report(3, ok == 20,
                  std::to_string(ok) + "/20 instances sandwiched at 50 points; max lower excess " +
                      fmt("%.3g", worst_lower) + ", max upper deficit " + fmt("%.3g", worst_upper) + " (tol 1e-6)");
}

int criterion4() {
    const StationaryInstance inst = make_chain_instance();
    const double F_star = 2.0 / 3.0;
    std::vector<double> gaps;
    std::string detail = "gap F* - lb_root at T=";
    for (int T : {2, 4, 8, 16}) {
        RunConfig cfg;
        cfg.T = T;
        cfg.epsilon = 0.05;
        cfg.max_iters = 100000;
        const RunResult r = run_eddp_fast(inst, cfg);
        const double gap = std::max(0.0, F_star - r.records.back().lb_root);
        gaps.push_back(gap);
        detail += std::to_string(T) + ":" + fmt("%.3g", gap) + " ";
    }
    bool monotone = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) monotone = monotone && gaps[k] <= gaps[k - 1] + 1e-12;
    const double limit = gaps.front() * std::pow(inst.lambda, 14) * 3.0;
    const bool ok = monotone && gaps.back() <= limit + 1e-12;
    return report(4, ok, detail + "; nonincreasing " + (monotone ? "yes" : "no") + "; T=16 limit " + fmt("%.3g", limit));
}

int criterion5() {
    ReservoirParams rp;
    rp.N = 10;
    const StationaryInstance inst = gen_reservoir(rp, 1);
    RunConfig cfg;
    cfg.T = 12;
    cfg.epsilon = 0.5;
    cfg.max_iters = 500;
    cfg.stall_iters = 1000000;
    const RunResult fast = run_eddp_fast(inst, cfg);
    const double lb_fast = fast.records.back().lb_root;
    std::vector<double> lbs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.seed = seed;
        const RunResult s = run_sddp(inst, cfg);
        // Compare at equal iteration counts.
        const std::size_t k = std::min(s.records.size(), fast.records.size()) - 1;
        lbs.push_back(s.records[k].lb_root);
    }
    const double med = median(lbs);
    const double rel = std::abs(med - lb_fast) / std::abs(lb_fast);
    return report(5, rel <= 0.02,
                  "median sddp lb " + fmt("%.6g", med) + " vs eddp-fast " + fmt("%.6g", lb_fast) + " after " +
                      std::to_string(fast.records.size()) + " iterations; relative difference " + fmt("%.4f", rel) +
                      " (limit 0.02)");
}

SaddleProblem pdsa_example() {
    SaddleProblem sp;
    sp.W = Eigen::MatrixXd::Ones(1, 1);
    sp.U = Eigen::MatrixXd::Zero(1, 1);
    sp.q = Eigen::VectorXd::Constant(1, 0.5);
    sp.u = Eigen::VectorXd::Zero(1);
    sp.f = PiecewiseLinearCost::affine(Eigen::VectorXd::Ones(1), 0.0);
    sp.lower = Eigen::VectorXd::Zero(1);
    sp.upper = Eigen::VectorXd::Ones(1);
    sp.nonneg = {1};
    return sp;
}

int criterion6() {
    const SaddleProblem sp = pdsa_example();
    auto medians = [&](long N) {
        std::vector<double> err, del;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const PdsaCertificate c = run_pdsa(sp, default_params(sp, N), seed);
            err.push_back(std::abs(c.x_bar(0) - 0.5));
            del.push_back(c.delta.norm());
        }
        return std::pair{median(err), median(del)};
    };
    const auto [e250, d250] = medians(250);
    const auto [e4000, d4000] = medians(4000);
    const bool ok = e4000 <= 0.02 && d4000 <= 0.02 && e4000 <= 0.5 * e250 && d4000 <= 0.5 * d250;
    return report(6, ok,
                  "median |x_bar - 0.5| " + fmt("%.3g", e250) + " -> " + fmt("%.3g", e4000) + ", median ||delta|| " +
                      fmt("%.3g", d250) + " -> " + fmt("%.3g", d4000) + " (N=250 -> 4000)");
}

int criterion7() {
    const auto t0 = Clock::now();
    const HierarchicalInstance h = gen_ed(EdParams{}, 7);
    RunConfig cfg;
    cfg.algo = Algo::Hddp;
    cfg.T = 6;
    cfg.epsilon = 5.0;
    cfg.max_iters = 150;
    cfg.seed = 7;
    cfg.policy_horizon = 150;
    cfg.policy_rollouts = 50;
    const RunResult r = run_hddp(h, cfg);
    const double ub = *r.records.back().ub_policy;
    // Exact lower bound from the LP form.
    RunConfig exact = cfg;
    exact.algo = Algo::EddpFast;
    exact.policy_horizon = 0;
    exact.policy_rollouts = 0;
    const double lb = run_eddp_fast(combined_instance(h), exact).records.back().lb_root;
    const double gap = (ub - lb) / std::abs(lb);
    const double secs = seconds_since(t0);
    return report(7, gap <= 0.05 && secs < 1800.0,
                  "LP lower bound " + fmt("%.6g", lb) + ", policy upper bound " + fmt("%.6g", ub) +
                      ", relative gap " + fmt("%.4f", gap) + " (limit 0.05), " + fmt("%.0f", secs) +
                      " s (limit 1800)");
}

int criterion8() {
    ReservoirParams rp;
    rp.N = 64;
    const StationaryInstance inst = gen_reservoir(rp, 3);
    RunConfig cfg;
    cfg.T = 6;
    cfg.epsilon = 0.5;
    cfg.max_iters = 30;
    auto timed = [&](int workers, std::string& trace) {
        cfg.workers = workers;
        const auto t0 = Clock::now();
        const RunResult r = run_eddp_fast(inst, cfg);
        const double secs = seconds_since(t0);
        std::ostringstream os;
        write_trace(os, r.records);
        trace = os.str();
        return secs;
    };
    std::string t1, t4;
    const double s1 = timed(1, t1);
    const double s4 = timed(4, t4);
    const bool identical = t1 == t4;
    const double speedup = s1 / s4;
    const unsigned hw = std::thread::hardware_concurrency();
    std::string detail = std::string("traces ") + (identical ? "identical" : "differ") + "; speedup " +
                         fmt("%.2f", speedup) + "x (limit 2.5) with " + std::to_string(hw) + " hardware threads";
    if (!identical) return report(8, false, detail);
    if (speedup >= 2.5) return report(8, true, detail);
    if (hw < 4) {
        report(8, false, detail + "; speedup not measurable on this host");
        return kSkip;
    }
    return report(8, false, detail);
}

int criterion9() {
    std::vector<std::string> failed;
    // LP strong duality on 100 random bounded LPs.
    {
        Rng rng(9);
        int ok = 0;
        for (int t = 0; t < 100; ++t) {
            const int n = 6, m = 4;
            Eigen::VectorXd c(n);
            for (int j = 0; j < n; ++j) c(j) = rng.uniform(-1.0, 1.0);
            LpProblem p = LpProblem::with_bounds(c, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 2.0));
            const Eigen::VectorXd x_feas = Eigen::VectorXd::Constant(n, 1.0);
            for (int i = 0; i < m; ++i) {
                Eigen::RowVectorXd a(n);
                for (int j = 0; j < n; ++j) a(j) = rng.uniform(-1.0, 1.0);
                if (i % 2) p.add_eq_row(a, a.dot(x_feas));
                else p.add_geq_row(a, a.dot(x_feas) - 0.5);
            }
            const LpSolution s = solve_lp(p);
            if (s.status == LpStatus::Optimal && std::abs(dual_objective(p, s) - s.objective_value) <= kLpCertTol &&
                primal_residual(p, s.x) <= kLpCertTol)
                ++ok;
        }
        if (ok != 100) failed.push_back("lp duality " + std::to_string(ok) + "/100");
    }
    // Cut monotonicity at 1000 points.
    {
        Rng rng(10);
        LowerModel m(2, 0.0);
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < 1000; ++i) pts.push_back(Eigen::Vector2d(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)));
        bool ok = true;
        for (int k = 0; k < 20; ++k) {
            std::vector<double> before;
            for (const auto& x : pts) before.push_back(m.evaluate(x));
            m.add_averaged_cut({rng.uniform(-1.0, 2.0)}, {Eigen::Vector2d(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))},
                               Eigen::Vector2d(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)));
            for (std::size_t i = 0; i < pts.size(); ++i) ok = ok && m.evaluate(pts[i]) >= before[i];
        }
        if (!ok) failed.push_back("cut monotonicity");
    }
    // Saturation map: levels only go down; points sharing a cell are within epsilon.
    {
        Rng rng(11);
        SaturationMap map(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones(), 0.1, 5);
        bool ok = true;
        for (int k = 0; k < 2000; ++k) {
            const Eigen::Vector2d x(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
            const Eigen::Vector2d y(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
            const int before = map.level(x);
            map.lower_level(x, rng.integer(0, 4));
            ok = ok && map.level(x) <= before;
            if (map.cell_of(x) == map.cell_of(y)) ok = ok && (x - y).norm() <= map.epsilon() + 1e-12;
        }
        if (!ok) failed.push_back("saturation map");
    }
    // Schedule hand values.
    {
        const auto eps = compute_epsilon_schedule(3, 0.5, 1.0, 0.1);
        if (std::abs(eps[2] - 2.0) > 1e-12 || std::abs(eps[1] - 1.1) > 1e-12 || std::abs(eps[0] - 0.65) > 1e-12)
            failed.push_back("epsilon schedule");
    }
    std::string detail = "lp duality (100 LPs), cut monotonicity (1000 points), saturation map, epsilon schedule";
    for (const auto& f : failed) detail += "; failed: " + f;
    return report(9, failed.empty(), detail);
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--criterion" && a + 1 < argc) which.push_back(std::atoi(argv[++a]));
        else {
            std::cerr << "usage: eddp_acceptance [--criterion k]...\n";
            return 2;
        }
    }
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    int (*const checks[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                               criterion6, criterion7, criterion8, criterion9};
    int code = kPass;
    for (int k : which) {
        if (k < 1 || k > 9) {
            std::cerr << "unknown criterion " << k << '\n';
            return 2;
        }
        const int c = checks[k - 1]();
        if (c == kFail) code = kFail;
        else if (c == kSkip && code == kPass) code = kSkip;
    }
    return code;
}
