#pragma once

#include "eddp/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace eddp {

/// One draw of the sampled term: value and subgradient of v~(., i) at x.
struct StochasticSample {
    double value = 0.0;
    Eigen::VectorXd subgradient;
};

/**
 * Generic saddle problem over a box X and a dual cone K*:
 *
 *   min_{x in X} max_{y in K*}  f(x) + E_i v~(x, i) + <y, q + U u - W x>.
 *
 * Rows with nonneg[r] encode W x >= q + U u (dual y_r >= 0); the others are
 * equalities with a free dual. U' y is then the subgradient of the optimal
 * value with respect to u.
 */
struct SaddleProblem {
    Eigen::MatrixXd W;
    Eigen::MatrixXd U;
    Eigen::VectorXd q;
    Eigen::VectorXd u;
    PiecewiseLinearCost f;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<char> nonneg;

    /// Number of samples of v~; 0 means v~ is identically zero.
    int num_samples = 0;
    std::function<StochasticSample(const Eigen::VectorXd& x, int i)> second_stage;
    /// Optional exact (1/num_samples) sum_i v~(x, i), used for the reported objective.
    std::function<double(const Eigen::VectorXd& x)> expected_value;
    /// Bound on every sampled subgradient norm.
    double G_bar = 0.0;

    /// Starting points; empty means box midpoint and zero.
    Eigen::VectorXd x_init;
    Eigen::VectorXd y_init;

    int dim() const { return static_cast<int>(lower.size()); }
    int rows() const { return static_cast<int>(q.size()); }
    /// Throws DimensionError or ConfigError.
    void validate() const;
    /// f(x) + E v~(x), exact when expected_value is set or there are no samples.
    double primal_value(const Eigen::VectorXd& x) const;
};

/// Constant step schedule (w = theta = 1).
struct PdsaParams {
    long N = 1;
    double w = 1.0;
    double theta = 1.0;
    double tau = 1.0;
    double eta = 1.0;
    double D_X = 1.0;
    double alpha_X = 1.0;
    double W_norm = 0.0;
    /// Confidence parameter of the high-probability bounds (reporting only).
    double confidence = 3.0;
    /// Bound on ||y*|| used in the reported bounds.
    double dual_cap = 1.0;

    /// Checks N >= 1, theta = 1 and tau * eta * alpha_X >= 2 ||W||^2; throws ConfigError.
    void validate() const;
};

/// Largest singular value by power iteration on W'W.
double spectral_norm(const Eigen::MatrixXd& W, double tol = 1e-8);
/// sqrt(max_{x,y in box} ||x - y||^2 / 2).
double box_diameter(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/**
 * tau = max(G_bar sqrt(3N) / (D_X sqrt(alpha)), sqrt(2) ||W|| / sqrt(alpha)),
 * eta = sqrt(2) ||W|| / sqrt(alpha) floored at 1e-12.
 */
PdsaParams default_params(const SaddleProblem& sp, long N);

struct PdsaCertificate {
    Eigen::VectorXd x_bar;
    Eigen::VectorXd y_bar;
    Eigen::VectorXd y_last;
    /// (sum w)^-1 w eta (y0 - yN).
    Eigen::VectorXd delta;
    double eps_p = 0.0;
    double eps_d = 0.0;
    double eps_c = 0.0;
    /// f(x_bar) + E v~(x_bar) + <y_bar, q + U u - W x_bar>.
    double objective = 0.0;
    /// U' y_bar.
    Eigen::VectorXd u_subgradient;
    long iterations = 0;
};

/// Optional per-iteration diagnostics: k, ||y_k||, i_k, objective estimate.
struct PdsaTrace {
    std::ostream* csv = nullptr;
};

/// Algorithm run with constant steps. Throws OracleError when a sampled
/// subgradient exceeds G_bar (1 + 1e-6).
PdsaCertificate run_pdsa(const SaddleProblem& sp, const PdsaParams& params, std::uint64_t seed,
                         const PdsaTrace& trace = {});

struct GapEstimates {
    double gap_star = 0.0;
    double gap_delta = 0.0;
};

/**
 * Empirical gap functions over the probe points. gap_star uses y_star;
 * gap_delta is +inf when q + U u - W x_bar + delta leaves the polar of K*.
 * With no sampled term, the exact box minimizer is added as a probe.
 */
GapEstimates estimate_gaps(const SaddleProblem& sp, const PdsaCertificate& cert,
                           const std::vector<Eigen::VectorXd>& probe_points, const Eigen::VectorXd& y_star);

/// argmin_{x in box} f(x) + <c, x> + tau/2 ||x - z||^2.
Eigen::VectorXd prox_piecewise(const PiecewiseLinearCost& f, const Eigen::VectorXd& c, const Eigen::VectorXd& z,
                               double tau, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

} // namespace eddp
