#include "cli.hpp"

#include "eddp/engine.hpp"
#include "eddp/errors.hpp"
#include "eddp/generators.hpp"
#include "eddp/hddp.hpp"
#include "eddp/instance_io.hpp"
#include "eddp/oracle.hpp"
#include "eddp/trace_io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace eddp::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    // run / verify / oracle
    std::string algo = "eddp-fast";
    std::string instance;
    std::string out;
    std::string trace;
    std::string cuts_out;
    std::string method = "auto";
    int T = 6;
    double epsilon = 0.05;
    int max_iters = 1000;
    std::uint64_t seed = 0;
    int workers = 1;
    bool no_reset = false;
    double eps_lo = 0.0;
    double rho = 0.0;
    int oracle_horizon = 20;
    int rollouts = 0;
    bool timing = false;
    long max_pdsa_iters = 20000;
    double dual_cap = 1.0;
    bool exact_cut_mode = false;
    int exact_cut_period = 25;
    bool slack_correction = false;
    double lipschitz = 0.0;
    int stall_iters = 50;
    // gen
    std::string kind = "chain";
    std::string emit_extensive;
    int N = 0;
    int size = 0;
    double lambda = 0.0;
    bool zero_inflow = false;
};

void add_common(CLI::App* sub, Options& o, std::string& config) {
    sub->add_option("--config", config, "key=value file with the same keys as the long flags; flags override it");
    sub->add_option("--instance", o.instance, "instance file");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Fills options absent from the command line. Blank lines and '#' comments are skipped.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") throw UsageError(path + ": nested config files are not supported");
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

void add_run_flags(CLI::App* sub, Options& o, bool seed_flag) {
    sub->add_option("--T", o.T, "effective planning horizon")->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", o.epsilon, "saturation cell width")->check(CLI::PositiveNumber);
    sub->add_option("--lipschitz", o.lipschitz, "(M + M_lower) estimate for the epsilon schedule");
    if (seed_flag) sub->add_option("--seed", o.seed, "master seed");
}

StationaryInstance load_stationary(const std::string& path) {
    if (detect_instance_kind(path) == InstanceKind::Hierarchical) {
        StationaryInstance c = combined_instance(load_hierarchical(path));
        c.finalize();
        return c;
    }
    return load_instance(path);
}

void print_vector(std::ostream& out, const char* label, const Eigen::VectorXd& v) {
    out << label;
    for (Eigen::Index j = 0; j < v.size(); ++j) out << ' ' << v(j);
    out << '\n';
}

RunConfig make_config(const Options& o, const CLI::App* sub) {
    RunConfig cfg;
    try {
        cfg.algo = parse_algo(o.algo);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    cfg.T = o.T;
    cfg.epsilon = o.epsilon;
    cfg.max_iters = o.max_iters;
    if (sub->count("--seed") > 0) cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.no_reset = o.no_reset;
    cfg.eps_lo = o.eps_lo;
    cfg.rho = o.rho;
    cfg.timing = o.timing;
    cfg.max_pdsa_iters = o.max_pdsa_iters;
    cfg.dual_cap = o.dual_cap;
    cfg.exact_cut_mode = o.exact_cut_mode;
    cfg.exact_cut_period = o.exact_cut_period;
    cfg.slack_correction = o.slack_correction;
    cfg.lipschitz_sum = o.lipschitz;
    cfg.stall_iters = o.stall_iters;
    if (o.rollouts > 0) {
        cfg.policy_horizon = o.oracle_horizon;
        cfg.policy_rollouts = o.rollouts;
    }
    if ((cfg.algo == Algo::Sddp || cfg.algo == Algo::Hddp) && !cfg.seed)
        throw UsageError(std::string(to_string(cfg.algo)) + " requires --seed");
    return cfg;
}

int cmd_run(const Options& o, const CLI::App* sub, std::ostream& out) {
    const RunConfig cfg = make_config(o, sub);
    const bool hier = detect_instance_kind(o.instance) == InstanceKind::Hierarchical;
    if (cfg.algo == Algo::Hddp && !hier) throw UsageError("hddp needs a hierarchical instance");

    RunResult r;
    std::optional<HierarchicalInstance> h;
    if (cfg.algo == Algo::Hddp) {
        h = load_hierarchical(o.instance);
        r = run_hddp(*h, cfg);
    } else {
        r = run(load_stationary(o.instance), cfg);
    }

    if (o.out.empty()) {
        write_trace(out, r.records, cfg.algo == Algo::Hddp);
    } else {
        save_trace(o.out, r.records, cfg.algo == Algo::Hddp);
    }
    if (!o.cuts_out.empty()) {
        std::ofstream f(o.cuts_out);
        if (!f) throw std::runtime_error("cannot write " + o.cuts_out);
        r.lower.write_csv(f);
    }
    if (!o.out.empty()) {
        out << std::setprecision(12);
        out << "status " << to_string(r.status) << " iterations " << r.iterations << " lb_root "
            << (r.records.empty() ? 0.0 : r.records.back().lb_root) << " cuts " << r.lower.num_cuts() << '\n';
        if (!r.eps_schedule.empty()) out << "eps0 " << r.eps_schedule.front() << '\n';
        if (h) out << "reported_bound " << hddp_reported_bound(*h, r, cfg.eps_lo > 0.0 ? cfg.eps_lo : h->eps_lo) << '\n';
        if (!r.records.empty() && r.records.back().ub_policy) out << "ub_policy " << *r.records.back().ub_policy << '\n';
        print_vector(out, "x_final", r.x_final);
    }
    return kOk;
}

OracleMethod parse_method(const std::string& m) {
    if (m == "auto") return OracleMethod::Auto;
    if (m == "tree") return OracleMethod::Tree;
    if (m == "recursive") return OracleMethod::Recursive;
    throw UsageError("unknown oracle method " + m);
}

int cmd_oracle(const Options& o, std::ostream& out) {
    const StationaryInstance inst = load_stationary(o.instance);
    const OracleResult res = oracle_value(inst, o.oracle_horizon, parse_method(o.method));
    out << std::setprecision(12) << "value " << res.value << " error_bound " << res.error_bound << '\n';
    print_vector(out, "x_root", res.x_root);
    return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const StationaryInstance inst = load_stationary(o.instance);
    const auto recs = load_trace(o.trace);
    if (recs.empty()) throw ParseError("trace has no iterations");
    RunConfig cfg;
    cfg.T = o.T;
    cfg.epsilon = o.epsilon;
    // Without the final model, assume cut slopes up to M_h / (1 - lambda).
    const double L = o.lipschitz > 0.0 ? o.lipschitz
                                       : (2.0 + inst.lambda / (1.0 - inst.lambda)) * std::max(inst.M_h, 1e-12);
    const double eps0 = compute_epsilon_schedule(cfg, inst, L).front();
    const OracleResult res = oracle_value(inst, o.oracle_horizon, parse_method(o.method));
    const double lb = recs.back().lb_root;
    const bool below = lb <= res.value + res.error_bound + 1e-6 * (1.0 + std::abs(res.value));
    const bool close = res.value - lb <= eps0;
    out << std::setprecision(12) << "lb " << lb << " oracle " << res.value << " bound " << res.error_bound << " eps0 "
        << eps0 << ' ' << (below && close ? "PASS" : "FAIL") << '\n';
    return below && close ? kOk : kSolverError;
}

int cmd_gen(const Options& o, const CLI::App* sub, std::ostream& out) {
    const bool has_N = sub->count("--N") > 0, has_size = sub->count("--size") > 0, has_lambda = sub->count("--lambda") > 0;
    if (!o.emit_extensive.empty() && o.kind != "ed") throw UsageError("--emit-extensive applies to --kind ed");
    if (o.kind == "chain") {
        save_instance(o.out, make_chain_instance());
    } else if (o.kind == "random") {
        save_instance(o.out, gen_random(o.seed));
    } else if (o.kind == "reservoir") {
        ReservoirParams p;
        if (has_N) p.N = o.N;
        if (has_size) p.num_reservoirs = o.size;
        if (has_lambda) p.lambda = o.lambda;
        p.zero_inflow = o.zero_inflow;
        save_instance(o.out, gen_reservoir(p, o.seed));
    } else if (o.kind == "ed") {
        EdParams p;
        if (has_N) p.N1 = p.N2 = o.N;
        if (has_size) {
            p.generators = o.size;
            p.regions = std::min(p.regions, o.size);
        }
        if (has_lambda) p.lambda = o.lambda;
        const HierarchicalInstance h = gen_ed(p, o.seed);
        save_hierarchical(o.out, h);
        if (!o.emit_extensive.empty()) save_instance(o.emit_extensive, combined_instance(h));
    } else {
        throw UsageError("unknown instance kind " + o.kind);
    }
    out << "wrote " << o.out << '\n';
    return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    std::string config;
    CLI::App app{"Explorative dual dynamic programming solver"};
    app.require_subcommand(1);

    CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--kind", o.kind, "chain, random, reservoir or ed");
    gen->add_option("--seed", o.seed, "generator seed");
    gen->add_option("--out", o.out, "output instance file")->required();
    gen->add_option("--N", o.N, "scenario count (ed: N1 = N2)")->check(CLI::PositiveNumber);
    gen->add_option("--size", o.size, "reservoirs or generators")->check(CLI::PositiveNumber);
    gen->add_option("--lambda", o.lambda, "discount factor");
    gen->add_flag("--zero-inflow", o.zero_inflow, "reservoir inflows all zero");
    gen->add_option("--emit-extensive", o.emit_extensive, "also write the exact LP form (ed)");

    CLI::App* run_cmd = app.add_subcommand("run", "run a solver and write its trace");
    add_common(run_cmd, o, config);
    run_cmd->add_option("--algo", o.algo, "eddp, eddp-fast, eddp-lu, sddp or hddp");
    add_run_flags(run_cmd, o, true);
    run_cmd->add_option("--max-iters", o.max_iters, "outer iteration limit")->check(CLI::PositiveNumber);
    run_cmd->add_option("--workers", o.workers, "worker threads, 0 for the hardware default")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_flag("--no-reset", o.no_reset, "keep a second trajectory that never resets");
    run_cmd->add_option("--eps-lo", o.eps_lo, "inexact subproblem accuracy (hddp)");
    run_cmd->add_option("--rho", o.rho, "failure budget in (0, 1) (hddp)");
    run_cmd->add_option("--out", o.out, "trace CSV path (stdout when absent)");
    run_cmd->add_option("--oracle-horizon", o.oracle_horizon, "policy evaluation horizon")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--rollouts", o.rollouts, "policy evaluation rollouts on the last iteration")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_flag("--timing", o.timing, "record wall-clock milliseconds");
    run_cmd->add_option("--cuts-out", o.cuts_out, "write the final cuts as CSV");
    run_cmd->add_option("--max-pdsa-iters", o.max_pdsa_iters, "cap on the PDSA budget")->check(CLI::PositiveNumber);
    run_cmd->add_option("--dual-cap", o.dual_cap, "dual norm cap in the PDSA budget");
    run_cmd->add_flag("--exact-cut-mode", o.exact_cut_mode, "periodic exact LP iterations (hddp)");
    run_cmd->add_option("--exact-cut-period", o.exact_cut_period, "period of the exact iterations")
        ->check(CLI::PositiveNumber);
    run_cmd->add_flag("--slack-correction", o.slack_correction, "shift inexact cuts down by eps_d");
    run_cmd->add_option("--stall-iters", o.stall_iters, "sddp stall window")->check(CLI::PositiveNumber);

    CLI::App* oracle = app.add_subcommand("oracle", "truncated-horizon reference value");
    add_common(oracle, o, config);
    oracle->add_option("--oracle-horizon", o.oracle_horizon, "stages including the root")
        ->check(CLI::NonNegativeNumber);
    oracle->add_option("--method", o.method, "auto, tree or recursive");

    CLI::App* verify = app.add_subcommand("verify", "check a trace against the oracle");
    add_common(verify, o, config);
    verify->add_option("--trace", o.trace, "trace CSV");
    verify->add_option("--oracle-horizon", o.oracle_horizon, "stages including the root")
        ->check(CLI::NonNegativeNumber);
    verify->add_option("--method", o.method, "auto, tree or recursive");
    add_run_flags(verify, o, false);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        for (CLI::App* sub : {run_cmd, oracle, verify}) {
            if (!sub->parsed()) continue;
            if (!config.empty()) apply_config(sub, config);
            if (o.instance.empty()) throw UsageError("--instance is required");
            if (sub == verify && o.trace.empty()) throw UsageError("--trace is required");
        }
        if (gen->parsed()) return cmd_gen(o, gen, out);
        if (run_cmd->parsed()) return cmd_run(o, run_cmd, out);
        if (oracle->parsed()) return cmd_oracle(o, out);
        return cmd_verify(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kSolverError;
    }
}

} // namespace eddp::cli
