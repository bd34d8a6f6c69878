#include "eddp/oracle.hpp"

#include "eddp/engine.hpp"
#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "eddp/upper.hpp"
#include "lp_builder.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <limits>
#include <vector>

namespace eddp {

namespace {

constexpr std::size_t kMaxTreeNodes = 1'000'000;
constexpr double kMaxDenseBytes = 2.0e9;
// Auto mode uses the tree LP below this many LP columns.
constexpr double kAutoTreeColumns = 1500.0;
constexpr double kRecursiveRelTol = 1e-5;
constexpr double kRecursiveMaxTol = 0.05;
constexpr int kLevelCutBudget = 1500;

double value_range(const StationaryInstance& inst) {
    return std::max(0.0, initial_upper_bound(inst) - initial_lower_bound(inst));
}

} // namespace

double oracle_error_bound(const StationaryInstance& inst, int H) {
    return std::pow(inst.lambda, std::max(H, 1)) * value_range(inst);
}

std::size_t tree_nodes(int N, int H) {
    std::size_t total = 0, level = 1;
    for (int d = 0; d < H; ++d) {
        if (total > std::numeric_limits<std::size_t>::max() - level) return std::numeric_limits<std::size_t>::max();
        total += level;
        if (level > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(std::max(N, 1)))
            level = std::numeric_limits<std::size_t>::max();
        else
            level *= static_cast<std::size_t>(N);
    }
    return total;
}

namespace {

OracleResult tree_oracle(const StationaryInstance& inst, int H) {
    const int N = inst.N(), n = inst.n;
    const std::size_t nodes = tree_nodes(N, H);
    if (nodes > kMaxTreeNodes) throw TreeTooLarge(std::to_string(N) + "^" + std::to_string(H) + " tree exceeds 1e6 nodes");
    int cols_per = n, rows_per = 0;
    for (int i = 0; i <= N; ++i) {
        const auto& s = inst.scenario(i);
        const int extra = s.cost.num_pieces() > 1 ? 1 : 0;
        cols_per = std::max(cols_per, n + extra);
        rows_per = std::max(rows_per, s.num_rows() + s.num_phi_rows() + (extra ? s.cost.num_pieces() : 0));
    }
    const double dense = static_cast<double>(nodes) * cols_per * static_cast<double>(nodes) * rows_per * 8.0;
    if (dense > kMaxDenseBytes) throw TreeTooLarge("tree LP exceeds the dense memory budget");

    detail::LpBuilder b;
    double constant = 0.0;
    // Breadth-first; the children of node k of the previous depth are k*N .. k*N + N - 1.
    std::vector<int> x_off;
    x_off.reserve(nodes);
    int prev_begin = 0, prev_count = 0;
    double weight = 1.0;
    for (int d = 0; d < std::max(H, 1); ++d) {
        const int width = d == 0 ? 1 : prev_count * N;
        const int begin = static_cast<int>(x_off.size());
        for (int k = 0; k < width; ++k) {
            const int scen = d == 0 ? 0 : 1 + k % N;
            const auto& s = inst.scenario(scen);
            const int off = b.num_vars();
            for (int j = 0; j < n; ++j) b.add_var(inst.lower(j), inst.upper(j), 0.0);
            x_off.push_back(off);
            detail::add_piecewise_cost(b, s.cost, off, weight, constant);
            const int parent = d == 0 ? -1 : x_off[static_cast<std::size_t>(prev_begin + k / N)];
            // A x - B x_parent (kind) b ;  R x - Q x_parent <= -r
            for (int r = 0; r < s.num_rows(); ++r) {
                std::vector<std::pair<int, double>> row;
                for (int j = 0; j < n; ++j)
                    if (s.A(r, j) != 0.0) row.emplace_back(off + j, s.A(r, j));
                double rhs = s.b(r);
                for (int j = 0; j < n; ++j) {
                    if (s.B(r, j) == 0.0) continue;
                    if (parent < 0)
                        rhs += s.B(r, j) * inst.x0(j);
                    else
                        row.emplace_back(parent + j, -s.B(r, j));
                }
                b.add_row(std::move(row), detail::to_sense(s.kinds[static_cast<std::size_t>(r)]), rhs);
            }
            for (int r = 0; r < s.num_phi_rows(); ++r) {
                std::vector<std::pair<int, double>> row;
                for (int j = 0; j < n; ++j)
                    if (s.R(r, j) != 0.0) row.emplace_back(off + j, s.R(r, j));
                double rhs = -s.r(r);
                for (int j = 0; j < n; ++j) {
                    if (s.Q(r, j) == 0.0) continue;
                    if (parent < 0)
                        rhs += s.Q(r, j) * inst.x0(j);
                    else
                        row.emplace_back(parent + j, -s.Q(r, j));
                }
                b.add_row(std::move(row), RowSense::Less, rhs);
            }
        }
        prev_begin = begin;
        prev_count = width;
        weight *= inst.lambda / N;
    }
    // Terminal value v0 after the last stage, weighted by lambda^H.
    constant += std::pow(inst.lambda, std::max(H, 1)) * initial_lower_bound(inst);

    const LpSolution sol = solve_lp(b.build());
    if (sol.status == LpStatus::Infeasible) throw InfeasibleRoot("scenario tree LP is infeasible");
    if (sol.status != LpStatus::Optimal) throw NumericalFailure("scenario tree LP is unbounded");
    OracleResult r;
    r.value = sol.objective_value + constant;
    r.error_bound = oracle_error_bound(inst, H);
    r.x_root = sol.x.head(n);
    return r;
}

// Vertices of the region of the box where plane p (value c_p + g_p x) is maximal.
std::vector<Eigen::VectorXd> region_vertices(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                             const std::vector<Eigen::VectorXd>& g, const std::vector<double>& c,
                                             std::size_t p) {
    const int n = static_cast<int>(lo.size());
    std::vector<Eigen::VectorXd> poly;
    if (n == 1) {
        double a = lo(0), bnd = hi(0);
        for (std::size_t q = 0; q < g.size() && a <= bnd; ++q) {
            if (q == p) continue;
            // (g_p - g_q) x >= c_q - c_p
            const double s = g[p](0) - g[q](0), t = c[q] - c[p];
            if (s > 0)
                a = std::max(a, t / s);
            else if (s < 0)
                bnd = std::min(bnd, t / s);
            else if (t > 1e-12)
                return {};
        }
        if (a > bnd) return {};
        poly.push_back(Eigen::VectorXd::Constant(1, a));
        poly.push_back(Eigen::VectorXd::Constant(1, bnd));
        return poly;
    }
    // n == 2: Sutherland-Hodgman clipping of the box rectangle.
    Eigen::Vector2d v[4] = {{lo(0), lo(1)}, {hi(0), lo(1)}, {hi(0), hi(1)}, {lo(0), hi(1)}};
    std::vector<Eigen::Vector2d> cur(v, v + 4);
    for (std::size_t q = 0; q < g.size() && !cur.empty(); ++q) {
        if (q == p) continue;
        const Eigen::Vector2d s = (g[p] - g[q]).head<2>();
        const double t = c[q] - c[p];
        auto inside = [&](const Eigen::Vector2d& x) { return s.dot(x) >= t - 1e-12; };
        std::vector<Eigen::Vector2d> next;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const Eigen::Vector2d& a = cur[k];
            const Eigen::Vector2d& bb = cur[(k + 1) % cur.size()];
            const bool ia = inside(a), ib = inside(bb);
            if (ia) next.push_back(a);
            if (ia != ib) {
                const double da = s.dot(a) - t, db = s.dot(bb) - t;
                const double lam = da / (da - db);
                next.push_back(a + lam * (bb - a));
            }
        }
        cur.swap(next);
    }
    for (const auto& x : cur) poly.push_back(x);
    return poly;
}

} // namespace

RecursiveOracle::RecursiveOracle(const StationaryInstance& inst, int H) : inst_(inst), H_(std::max(H, 1)) {
    const int n = inst.n;
    if (n > 2) throw ConfigError("the recursive oracle supports n <= 2");
    const double v0 = initial_lower_bound(inst);
    LowerModel W(n, v0);
    const int N = inst.N();
    // Per-level refinement gap. On each linear piece of the model the gap to
    // T W is convex, so bounding it at the piece vertices bounds it everywhere.
    // A gap left at level t reaches W_{H-1} damped by lambda^(H-1-t), so early
    // levels run coarse.
    const double range = value_range(inst);
    const double tol_final = kRecursiveRelTol * std::max(1.0, range);
    drift_ = 0.0;
    for (int t = 1; t < H_; ++t) {
        LowerModel next(n, v0);
        const double damp = std::pow(inst.lambda, H_ - 1 - t);
        double tol = std::max(tol_final, std::min(kRecursiveMaxTol * std::max(1.0, range), tol_final / damp));
        int budget = kLevelCutBudget;
        // True value and supporting cut of T W at x.
        auto support = [&](const Eigen::VectorXd& x) {
            std::vector<double> vals;
            std::vector<Eigen::VectorXd> grads;
            for (int i = 1; i <= N; ++i) {
                const SubproblemResult s = solve_subproblem(inst, W, i, x);
                vals.push_back(s.value);
                grads.push_back(s.subgradient);
            }
            Cut c;
            c.anchor = x;
            c.gradient = Eigen::VectorXd::Zero(n);
            double sum = 0.0;
            for (int i = 0; i < N; ++i) {
                sum += vals[static_cast<std::size_t>(i)];
                c.gradient += grads[static_cast<std::size_t>(i)];
            }
            c.intercept = sum / N;
            c.gradient /= N;
            c.iteration = t;
            return c;
        };
        // (T W)(x) at every evaluated point, keyed to within 1e-11.
        std::map<std::array<long long, 2>, double> checked;
        auto key_of = [&](const Eigen::VectorXd& x) {
            std::array<long long, 2> key{0, 0};
            for (int j = 0; j < n; ++j) key[static_cast<std::size_t>(j)] = std::llround(x(j) * 1e11);
            return key;
        };

        for (;;) {
            if (next.num_cuts() > budget) {
                // Out of pieces for this level: settle for a coarser gap.
                tol *= 2.0;
                budget += kLevelCutBudget / 2;
            }
            std::vector<Eigen::VectorXd> g{Eigen::VectorXd::Zero(n)};
            std::vector<double> c{v0};
            for (const auto& cut : next.cuts()) {
                g.push_back(cut.gradient);
                c.push_back(cut.constant());
            }
            std::vector<Eigen::VectorXd> verts;
            std::vector<char> live(g.size(), 0);
            for (std::size_t p = 0; p < g.size(); ++p)
                for (auto& x : region_vertices(inst.lower, inst.upper, g, c, p)) {
                    live[p] = 1;
                    for (int j = 0; j < n; ++j) x(j) = std::clamp(x(j), inst.lower(j), inst.upper(j));
                    verts.push_back(x);
                }
            // A point already evaluated stays within tol: the model only grows and never exceeds T W.
            std::vector<Cut> fresh;
            for (const auto& x : verts) {
                const auto key = key_of(x);
                if (checked.count(key)) continue;
                const double m = next.evaluate(x);
                Cut cut = support(x);
                checked.emplace(key, cut.intercept);
                if (cut.intercept > m + tol) fresh.push_back(std::move(cut));
            }
            if (fresh.empty()) {
                // The achieved gap, usually far below tol.
                double gap = 0.0;
                for (const auto& x : verts) gap = std::max(gap, checked.at(key_of(x)) - next.evaluate(x));
                drift_ += damp * gap;
                // Drop cuts that are nowhere maximal.
                LowerModel pruned(n, v0);
                for (std::size_t k = 0; k < next.cuts().size(); ++k)
                    if (live[k + 1]) pruned.add_cut(next.cuts()[k]);
                next = std::move(pruned);
                break;
            }
            for (auto& cut : fresh) next.add_cut(std::move(cut));
        }
        W = std::move(next);
    }
    model_ = std::move(W);
    ctg_bound_ = std::pow(inst.lambda, H_ - 1) * range + drift_;

    const SubproblemResult root = solve_subproblem(inst, model_, 0, inst.x0);
    result_.value = root.value;
    result_.error_bound = oracle_error_bound(inst, H_) + inst.lambda * drift_;
    result_.x_root = root.x;
}

double RecursiveOracle::objective(const Eigen::VectorXd& x) const {
    return inst_.scenario0.cost.evaluate(x) + inst_.lambda * model_.evaluate(x);
}

OracleResult oracle_value(const StationaryInstance& inst, int H, OracleMethod method) {
    if (H < 0) throw ConfigError("oracle horizon must be nonnegative");
    if (method == OracleMethod::Auto) {
        const double cols = static_cast<double>(tree_nodes(inst.N(), std::max(H, 1))) * (inst.n + 1);
        method = (cols <= kAutoTreeColumns || inst.n > 2) ? OracleMethod::Tree : OracleMethod::Recursive;
    }
    if (method == OracleMethod::Tree) return tree_oracle(inst, std::max(H, 1));
    return RecursiveOracle(inst, H).result();
}

} // namespace eddp
