#pragma once

#include "eddp/cuts.hpp"
#include "eddp/model.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace eddp {

/**
 * Truncated-horizon reference values. The horizon H counts stages
 * including the root; the terminal value after stage H is the constant
 * lower bound v0, so value <= F* <= value + error_bound with
 * error_bound = lambda^H (vbar0 - v0).
 */
struct OracleResult {
    double value = 0.0;
    double error_bound = 0.0;
    Eigen::VectorXd x_root; ///< optimal first-stage decision of the truncated problem
};

enum class OracleMethod {
    Auto,      ///< tree LP when small, otherwise the recursive method (n <= 2)
    Tree,      ///< one extensive-form LP over the full scenario tree
    Recursive, ///< exact polyhedral value iteration, n <= 2 only
};

/// lambda^H (vbar0 - v0); H = 0 is treated as H = 1.
double oracle_error_bound(const StationaryInstance& inst, int H);
/// sum_{d < H} N^d, saturating at SIZE_MAX.
std::size_t tree_nodes(int N, int H);

/// Throws TreeTooLarge when the tree LP exceeds 1e6 nodes or the dense LP memory budget.
OracleResult oracle_value(const StationaryInstance& inst, int H, OracleMethod method = OracleMethod::Auto);

/**
 * W_t ~ T^t v0 for the Bellman operator T of the instance, built as a max
 * of affine pieces on the box by adding supporting cuts near the vertices
 * of the current envelope until every vertex gap is within a per-level
 * tolerance (n <= 2). Every cut is valid, so W_t <= T^t v0; the damped sum
 * of the tolerances, drift(), is included in the reported bounds.
 */
class RecursiveOracle {
public:
    /// Builds W_{H-1}. Throws ConfigError for n > 2.
    RecursiveOracle(const StationaryInstance& inst, int H);

    int horizon() const { return H_; }
    /// W_{H-1}(x) <= V(x) <= W_{H-1}(x) + cost_to_go_bound().
    double cost_to_go(const Eigen::VectorXd& x) const { return model_.evaluate(x); }
    double cost_to_go_bound() const { return ctg_bound_; }
    /// h0(x) + lambda W_{H-1}(x): lower estimate of the first-stage objective F(x).
    double objective(const Eigen::VectorXd& x) const;
    const OracleResult& result() const { return result_; }
    /// Upper bound on T^{H-1} v0 - W_{H-1}.
    double drift() const { return drift_; }
    const LowerModel& model() const { return model_; }

private:
    const StationaryInstance& inst_;
    int H_;
    LowerModel model_;
    double ctg_bound_ = 0.0;
    double drift_ = 0.0;
    OracleResult result_;
};

} // namespace eddp
