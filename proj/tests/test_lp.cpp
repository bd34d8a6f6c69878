#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "eddp/rng.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include <optional>
#include <vector>

using namespace eddp;
using Rational = boost::multiprecision::cpp_rational;

namespace {

LpProblem one_var(double lo, double hi, double c) {
    return LpProblem::with_bounds(Eigen::VectorXd::Constant(1, c), Eigen::VectorXd::Constant(1, lo),
                                  Eigen::VectorXd::Constant(1, hi));
}

Eigen::RowVectorXd row(std::initializer_list<double> v) {
    Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index j = 0;
    for (double x : v) r(j++) = x;
    return r;
}

void expect_certified(const LpProblem& p, const LpSolution& s) {
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_LE(primal_residual(p, s.x), kLpCertTol);
    EXPECT_LE(std::abs(s.objective_value - dual_objective(p, s)), kLpCertTol * (1.0 + std::abs(s.objective_value)));
    for (int i = 0; i < p.num_geq(); ++i) {
        EXPECT_GE(s.duals(p.num_eq() + i), -kLpCertTol);
        const double slack = p.geq_matrix.row(i).dot(s.x) - p.geq_rhs(i);
        EXPECT_LE(std::abs(slack * s.duals(p.num_eq() + i)), kLpCertTol * (1.0 + std::abs(s.objective_value)));
    }
}

// Dense tableau simplex in exact arithmetic with Bland's rule, for
// min c'x, G x >= h, 0 <= x <= u with u finite.
struct ReferenceResult {
    bool feasible = false;
    Rational objective;
    std::vector<Rational> x;
    bool unique = false;
};

class RationalSimplex {
public:
    RationalSimplex(std::vector<std::vector<Rational>> G, std::vector<Rational> h, std::vector<Rational> u,
                    std::vector<Rational> c)
        : c_(std::move(c)) {
        const int m = static_cast<int>(G.size()), n = static_cast<int>(c_.size());
        nx_ = n;
        // Columns: x (n), surplus s (m), upper slack t (n), artificials (m + n).
        rows_ = m + n;
        nreal_ = n + m + n;
        cols_ = nreal_ + rows_;
        T_.assign(static_cast<std::size_t>(rows_), std::vector<Rational>(static_cast<std::size_t>(cols_ + 1), 0));
        for (int i = 0; i < m; ++i) {
            const int sign = h[static_cast<std::size_t>(i)] < 0 ? -1 : 1;
            for (int j = 0; j < n; ++j) at(i, j) = sign * G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            at(i, n + i) = -sign;
            rhs(i) = sign * h[static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < n; ++j) {
            at(m + j, j) = 1;
            at(m + j, n + m + j) = 1;
            rhs(m + j) = u[static_cast<std::size_t>(j)];
        }
        basis_.resize(static_cast<std::size_t>(rows_));
        for (int i = 0; i < rows_; ++i) {
            at(i, nreal_ + i) = 1;
            basis_[static_cast<std::size_t>(i)] = nreal_ + i;
        }
    }

    ReferenceResult solve() {
        ReferenceResult res;
        std::vector<Rational> phase1(static_cast<std::size_t>(cols_), 0);
        for (int i = 0; i < rows_; ++i) phase1[static_cast<std::size_t>(nreal_ + i)] = 1;
        run(phase1, cols_);
        Rational infeas = 0;
        for (int i = 0; i < rows_; ++i)
            if (basis_[static_cast<std::size_t>(i)] >= nreal_) infeas += rhs(i);
        if (infeas > 0) return res;
        // Drive zero-level artificials out where possible.
        for (int i = 0; i < rows_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < nreal_) continue;
            for (int j = 0; j < nreal_; ++j)
                if (at(i, j) != 0) {
                    pivot(i, j);
                    break;
                }
        }
        std::vector<Rational> cost(static_cast<std::size_t>(cols_), 0);
        for (int j = 0; j < nx_; ++j) cost[static_cast<std::size_t>(j)] = c_[static_cast<std::size_t>(j)];
        run(cost, nreal_);
        res.feasible = true;
        res.x.assign(static_cast<std::size_t>(nx_), 0);
        for (int i = 0; i < rows_; ++i)
            if (basis_[static_cast<std::size_t>(i)] < nx_) res.x[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = rhs(i);
        res.objective = 0;
        for (int j = 0; j < nx_; ++j) res.objective += c_[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
        // Unique when every nonbasic reduced cost is strictly positive.
        const auto d = reduced(cost, nreal_);
        res.unique = true;
        std::vector<char> basic(static_cast<std::size_t>(cols_), 0);
        for (int b : basis_) basic[static_cast<std::size_t>(b)] = 1;
        for (int j = 0; j < nreal_; ++j)
            if (!basic[static_cast<std::size_t>(j)] && d[static_cast<std::size_t>(j)] == 0) res.unique = false;
        return res;
    }

private:
    Rational& at(int i, int j) { return T_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    Rational& rhs(int i) { return T_[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols_)]; }

    std::vector<Rational> reduced(const std::vector<Rational>& cost, int limit) {
        std::vector<Rational> d(static_cast<std::size_t>(limit));
        for (int j = 0; j < limit; ++j) {
            Rational v = cost[static_cast<std::size_t>(j)];
            for (int i = 0; i < rows_; ++i) v -= cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] * at(i, j);
            d[static_cast<std::size_t>(j)] = v;
        }
        return d;
    }

    void run(const std::vector<Rational>& cost, int limit) {
        for (;;) {
            const auto d = reduced(cost, limit);
            int enter = -1;
            for (int j = 0; j < limit; ++j)
                if (d[static_cast<std::size_t>(j)] < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return;
            int leave = -1;
            Rational best;
            for (int i = 0; i < rows_; ++i) {
                if (at(i, enter) <= 0) continue;
                const Rational ratio = rhs(i) / at(i, enter);
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) throw std::runtime_error("reference LP unbounded");
            pivot(leave, enter);
        }
    }

    void pivot(int r, int c) {
        const Rational p = at(r, c);
        for (int j = 0; j <= cols_; ++j) T_[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] /= p;
        for (int i = 0; i < rows_; ++i) {
            if (i == r || at(i, c) == 0) continue;
            const Rational f = at(i, c);
            for (int j = 0; j <= cols_; ++j)
                T_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= f * T_[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    std::vector<Rational> c_;
    int nx_ = 0, rows_ = 0, nreal_ = 0, cols_ = 0;
    std::vector<std::vector<Rational>> T_;
    std::vector<int> basis_;
};

} // namespace

TEST(LpSolver, SingleVariableLowerRow) {
    LpProblem p = one_var(0.0, 10.0, 1.0);
    p.add_geq_row(row({1.0}), 1.0);
    const LpSolution s = solve_lp(p);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.x(0), 1.0, 1e-12);
    EXPECT_NEAR(s.objective_value, 1.0, 1e-12);
    EXPECT_NEAR(s.duals(0), 1.0, 1e-12);
}

TEST(LpSolver, ContradictoryRowsAreInfeasible) {
    LpProblem p = one_var(-kInf, kInf, 0.0);
    p.add_geq_row(row({1.0}), 2.0);
    p.add_geq_row(row({-1.0}), -1.0);
    EXPECT_EQ(solve_lp(p).status, LpStatus::Infeasible);
}

TEST(LpSolver, TwoVariableRowDual) {
    LpProblem p = LpProblem::with_bounds(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d::Zero(),
                                         Eigen::Vector2d::Constant(kInf));
    p.add_geq_row(row({-1.0, -1.0}), -1.0);
    const LpSolution s = solve_lp(p);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective_value, -1.0, 1e-12);
    EXPECT_NEAR(s.x.sum(), 1.0, 1e-12);
    EXPECT_NEAR(s.duals(0), 1.0, 1e-12);
    expect_certified(p, s);
}

TEST(LpSolver, UnboundedDetected) {
    LpProblem p = one_var(-kInf, kInf, 1.0);
    p.add_geq_row(row({-1.0}), -5.0);
    EXPECT_EQ(solve_lp(p).status, LpStatus::Unbounded);
}

TEST(LpSolver, ParametricDualOfChainRow) {
    // min x s.t. x >= 0.5 x_prev, x in [0, 1]; value 0.5 x_prev.
    const double x_prev = 1.0;
    LpProblem p = one_var(0.0, 1.0, 1.0);
    p.add_geq_row(row({1.0}), 0.5 * x_prev);
    const LpSolution s = solve_lp(p);
    // d rhs / d x_prev = 0.5.
    EXPECT_NEAR(parametric_dual(p, s, Eigen::VectorXd::Constant(1, 0.5)), 0.5, 1e-12);
    EXPECT_EQ(parametric_dual(p, s, Eigen::VectorXd::Zero(1)), 0.0);
    const double one = parametric_dual(p, s, Eigen::VectorXd::Constant(1, 0.3));
    EXPECT_NEAR(parametric_dual(p, s, Eigen::VectorXd::Constant(1, 0.6)), 2.0 * one, 1e-15);
}

TEST(LpSolver, ParametricDualNeedsOptimal) {
    LpProblem p = one_var(0.0, 1.0, 1.0);
    p.add_geq_row(row({1.0}), 2.0);
    const LpSolution s = solve_lp(p);
    EXPECT_THROW(parametric_dual(p, s, Eigen::VectorXd::Ones(1)), StatusError);
}

TEST(LpSolver, EqualityDualsAndCertificates) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 6, me = 2, mg = 3;
        LpProblem p = LpProblem::with_bounds(Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(-1.0, 1.0); }),
                                             Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 3.0));
        const Eigen::VectorXd xhat = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(0.5, 2.5); });
        for (int i = 0; i < me; ++i) {
            Eigen::RowVectorXd a = Eigen::RowVectorXd::NullaryExpr(n, [&] { return rng.uniform(-1.0, 1.0); });
            p.add_eq_row(a, a.dot(xhat));
        }
        for (int i = 0; i < mg; ++i) {
            Eigen::RowVectorXd a = Eigen::RowVectorXd::NullaryExpr(n, [&] { return rng.uniform(-1.0, 1.0); });
            p.add_geq_row(a, a.dot(xhat) - rng.uniform(0.0, 0.5));
        }
        expect_certified(p, solve_lp(p));
    }
}

TEST(LpSolver, DeterministicOnRepeat) {
    LpProblem p = LpProblem::with_bounds(Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d::Zero(),
                                         Eigen::Vector3d::Constant(5.0));
    p.add_geq_row(row({1.0, 1.0, 0.0}), 1.0);
    p.add_geq_row(row({0.0, 1.0, 1.0}), 1.0);
    const LpSolution a = solve_lp(p), b = solve_lp(p);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.duals, b.duals);
}

TEST(LpProperty, ValueFunctionConvexInRhs) {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4, m = 3;
        const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(0.1, 2.0); });
        Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return rng.uniform(0.0, 1.0); });
        auto value = [&](const Eigen::VectorXd& b) {
            LpProblem p = LpProblem::with_bounds(c, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 10.0));
            for (int i = 0; i < m; ++i) p.add_geq_row(A.row(i), b(i));
            const LpSolution s = solve_lp(p);
            EXPECT_EQ(s.status, LpStatus::Optimal);
            return s.objective_value;
        };
        const Eigen::VectorXd b1 = Eigen::VectorXd::NullaryExpr(m, [&] { return rng.uniform(0.0, 2.0); });
        const Eigen::VectorXd b2 = Eigen::VectorXd::NullaryExpr(m, [&] { return rng.uniform(0.0, 2.0); });
        EXPECT_LE(value(0.5 * (b1 + b2)), 0.5 * (value(b1) + value(b2)) + 1e-6);
    }
}

TEST(LpProperty, StrongDualityOnRandomLps) {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 8, m = 5;
        LpProblem p = LpProblem::with_bounds(Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(-2.0, 2.0); }),
                                             Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 4.0));
        const Eigen::VectorXd xhat = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(-0.5, 3.5); });
        for (int i = 0; i < m; ++i) {
            Eigen::RowVectorXd a = Eigen::RowVectorXd::NullaryExpr(n, [&] { return rng.uniform(-3.0, 3.0); });
            p.add_geq_row(a, a.dot(xhat) - rng.uniform(0.0, 1.0));
        }
        expect_certified(p, solve_lp(p));
    }
}

TEST(LpProperty, MatchesRationalReferenceOn100Random5x8) {
    Rng rng(2024);
    int unique_checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 5, n = 8;
        std::vector<std::vector<Rational>> G(m, std::vector<Rational>(n));
        std::vector<Rational> h(m), u(n), c(n);
        LpProblem p;
        p.objective.resize(n);
        p.lower = Eigen::VectorXd::Zero(n);
        p.upper.resize(n);
        for (int j = 0; j < n; ++j) {
            const int uj = rng.integer(1, 6);
            const int cj = rng.integer(-5, 5);
            u[static_cast<std::size_t>(j)] = uj;
            c[static_cast<std::size_t>(j)] = cj;
            p.upper(j) = uj;
            p.objective(j) = cj;
        }
        std::vector<int> xhat(n);
        for (int j = 0; j < n; ++j) xhat[static_cast<std::size_t>(j)] = rng.integer(0, static_cast<int>(p.upper(j)));
        for (int i = 0; i < m; ++i) {
            Eigen::RowVectorXd a(n);
            int dot = 0;
            for (int j = 0; j < n; ++j) {
                const int g = rng.integer(-4, 4);
                G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g;
                a(j) = g;
                dot += g * xhat[static_cast<std::size_t>(j)];
            }
            const int hi = dot - rng.integer(0, 3);
            h[static_cast<std::size_t>(i)] = hi;
            p.add_geq_row(a, hi);
        }
        const ReferenceResult ref = RationalSimplex(G, h, u, c).solve();
        ASSERT_TRUE(ref.feasible);
        const LpSolution s = solve_lp(p);
        ASSERT_EQ(s.status, LpStatus::Optimal) << "trial " << trial;
        const double ref_obj = ref.objective.convert_to<double>();
        EXPECT_NEAR(s.objective_value, ref_obj, 1e-9 * (1.0 + std::abs(ref_obj))) << "trial " << trial;
        if (ref.unique) {
            ++unique_checked;
            for (int j = 0; j < n; ++j)
                EXPECT_NEAR(s.x(j), ref.x[static_cast<std::size_t>(j)].convert_to<double>(), 1e-9) << "trial " << trial;
        }
    }
    EXPECT_GT(unique_checked, 0);
}
