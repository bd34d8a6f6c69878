#pragma once

#include <Eigen/Dense>

#include <limits>

namespace eddp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Internal primal/dual feasibility tolerance of the simplex iterations.
inline constexpr double kLpFeasTol = 1e-9;
/// Tolerance certified on residuals, complementarity and duality gap.
inline constexpr double kLpCertTol = 1e-7;

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

/**
 * Linear program in the form
 *
 *   minimize    objective' x
 *   subject to  eq_matrix x  = eq_rhs
 *               geq_matrix x >= geq_rhs
 *               lower <= x <= upper      (entries may be infinite)
 *
 * Empty matrices (zero rows) are allowed; their column count must still
 * match the number of variables unless they have zero rows.
 */
struct LpProblem {
    Eigen::VectorXd objective;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::MatrixXd geq_matrix;
    Eigen::VectorXd geq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_eq() const { return static_cast<int>(eq_rhs.size()); }
    int num_geq() const { return static_cast<int>(geq_rhs.size()); }
    int num_rows() const { return num_eq() + num_geq(); }

    /// Variables bounded by [lo, hi], no rows.
    static LpProblem with_bounds(Eigen::VectorXd c, Eigen::VectorXd lo, Eigen::VectorXd hi);
    void add_eq_row(const Eigen::RowVectorXd& a, double rhs);
    void add_geq_row(const Eigen::RowVectorXd& a, double rhs);
};

/**
 * Result of solve_lp. Duals are ordered equality rows first, then the
 * >= rows. For a minimization problem the dual of a >= row is nonnegative
 * and equals the derivative of the optimal value with respect to its
 * right-hand side. reduced_costs[j] = objective[j] - (A' duals)[j].
 */
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective_value = 0.0;
    Eigen::VectorXd duals;
    Eigen::VectorXd reduced_costs;
    int iterations = 0;
};

/**
 * Bounded-variable revised simplex (two phases, explicit basis inverse).
 * Dantzig pricing switches to Bland's rule after 10*(rows+cols)
 * iterations. Deterministic for a fixed input.
 *
 * Throws NumericalFailure if neither the regular pass nor the Bland-only
 * retry produces a certified answer.
 */
LpSolution solve_lp(const LpProblem& p);

/// Directional derivative of the optimal value along a right-hand-side
/// perturbation, i.e. <duals, rhs_direction>. Throws StatusError unless
/// sol is Optimal and LengthMismatch on a size mismatch.
double parametric_dual(const LpProblem& p, const LpSolution& sol,
                       const Eigen::VectorXd& rhs_direction);

/// Max absolute violation of rows and bounds by x.
double primal_residual(const LpProblem& p, const Eigen::VectorXd& x);

/// Objective of the LP dual evaluated at (duals, reduced costs), using the
/// bound that each reduced cost sits at. Equals the primal objective on
/// an optimal pair.
double dual_objective(const LpProblem& p, const LpSolution& sol);

} // namespace eddp
