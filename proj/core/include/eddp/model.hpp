#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace eddp {

/// Convex stage cost h(x) = max_p (gradients.row(p) x + offsets(p)).
struct PiecewiseLinearCost {
    Eigen::MatrixXd gradients; // one row per piece
    Eigen::VectorXd offsets;

    static PiecewiseLinearCost affine(const Eigen::VectorXd& gradient, double offset = 0.0);
    static PiecewiseLinearCost zero(int n) { return affine(Eigen::VectorXd::Zero(n), 0.0); }

    int num_pieces() const { return static_cast<int>(offsets.size()); }
    int dim() const { return static_cast<int>(gradients.cols()); }

    double evaluate(const Eigen::VectorXd& x) const;
    /// Index of the first piece attaining the max at x.
    int active_piece(const Eigen::VectorXd& x) const;
    Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const { return gradients.row(active_piece(x)).transpose(); }
    /// Max Euclidean norm over piece gradients.
    double lipschitz() const;
    /// Exact max over the box (each piece is maximized coordinate-wise).
    double max_over_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;
    /// Exact min over the box (epigraph LP).
    double min_over_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;
    /// Sum of two costs over concatenated variables (x, z): max over piece pairs.
    static PiecewiseLinearCost concat_sum(const PiecewiseLinearCost& a, const PiecewiseLinearCost& b);
};

enum class RowKind { Equality, GreaterEqual };

/**
 * One sample of the stage data. The feasible set given the previous state
 * x_prev is
 *
 *   A x  (= or >=)  B x_prev + b     row-wise per `kinds`
 *   R x  <=         Q x_prev - r     (affine functional block, may be empty)
 */
struct Scenario {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd b;
    std::vector<RowKind> kinds;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    Eigen::VectorXd r;
    PiecewiseLinearCost cost;

    int num_rows() const { return static_cast<int>(b.size()); }
    int num_phi_rows() const { return static_cast<int>(r.size()); }
    /// Throws DimensionError on any inconsistent shape.
    void validate(int n) const;
};

enum class RowSense { Equal, Greater, Less };

/**
 * Explicit constraint block over x: matrix x (sense) rhs, plus bounds.
 * `coupling` holds d rhs / d x_prev, so that the subgradient of a value
 * function with respect to x_prev is coupling' * (rhs sensitivities).
 */
struct LinearConstraintBlock {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    std::vector<RowSense> sense;
    Eigen::MatrixXd coupling;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int num_rows() const { return static_cast<int>(rhs.size()); }
};

/**
 * Stationary discounted problem over the box [lower, upper]:
 *
 *   min_{x in X(x0, scenario0)} h0(x) + lambda V(x),
 *   V(x) = (1/N) sum_i min_{y in X(x, scenario_i)} h_i(y) + lambda V(y).
 */
struct StationaryInstance {
    int n = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd x0;
    Scenario scenario0;
    std::vector<Scenario> scenarios;
    double lambda = 0.5;

    // Derived by finalize().
    double D = 0.0;   ///< max coordinate range of the box
    double M_h = 0.0; ///< max cost-piece gradient norm over scenarios 0..N

    int N() const { return static_cast<int>(scenarios.size()); }
    /// Index 0 is the deterministic first stage; 1..N are the samples.
    const Scenario& scenario(int i) const;

    /// Validate every invariant, derive D and M_h, and check the root LP
    /// is feasible. Throws DimensionError, ConfigError or InfeasibleRoot.
    void finalize();
    /// Same as finalize() without the root LP solve.
    void finalize_unchecked();
};

/// Constraint block of X(x_prev, scenario_index). Throws IndexError for an
/// index above N and OutOfDomain if x_prev leaves the box by more than 1e-9.
LinearConstraintBlock stage_feasible_set(const StationaryInstance& inst, int scenario_index,
                                         const Eigen::VectorXd& x_prev);

/// Lower-level second-stage sample: A2 z2 (kinds) B2 z1 + b2, box on z2, cost over z2.
struct SecondStageSample {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd b;
    std::vector<RowKind> kinds;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    PiecewiseLinearCost cost;
};

/**
 * Two-stage lower level of a hierarchical problem. First stage z1 couples
 * to the top-level decision x through A1 z1 (kinds) B1 x + b1.
 */
struct TwoStageLowerLevel {
    int n1 = 0;
    Eigen::MatrixXd A1;
    Eigen::MatrixXd B1;
    Eigen::VectorXd b1;
    std::vector<RowKind> kinds1;
    Eigen::VectorXd lower1;
    Eigen::VectorXd upper1;
    PiecewiseLinearCost cost1;
    std::vector<SecondStageSample> samples;
    /// Bound on the norm of second-stage subgradients with respect to z1.
    double subgradient_bound = 0.0;

    int N2() const { return static_cast<int>(samples.size()); }
    void validate(int n) const;
};

struct HierarchicalInstance {
    StationaryInstance top;
    TwoStageLowerLevel lower;
    double eps_lo = 0.1;
    double rho = 0.1;
    double M_D = 0.0; ///< 0 means default 10 M_h / (1 - lambda)
    double eps_regularity = std::numeric_limits<double>::infinity();

    double M_D_value() const;
    void finalize();
};

/**
 * Exact LP form of a hierarchical instance: the lower-level first-stage
 * variables and one copy of every second-stage sample's variables are
 * appended to the top-level decision. The top-level coordinates come first,
 * so cuts on the top-level space embed by zero padding.
 */
StationaryInstance combined_instance(const HierarchicalInstance& h);

} // namespace eddp
