#pragma once

#include "eddp/model.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace eddp {

/// Affine minorant intercept + <gradient, x - anchor> - slack_correction.
struct Cut {
    double intercept = 0.0;
    Eigen::VectorXd gradient;
    Eigen::VectorXd anchor;
    int iteration = 0;
    double slack_correction = 0.0;

    /// Constant term after folding the anchor: value(x) = constant() + <gradient, x>.
    double constant() const { return intercept - gradient.dot(anchor) - slack_correction; }
    double value(const Eigen::VectorXd& x) const { return constant() + gradient.dot(x); }
};

/// Lower cutting-plane model max(v0, cuts).
class LowerModel {
public:
    LowerModel() = default;
    LowerModel(int n, double v0) : n_(n), v0_(v0) {}

    int dim() const { return n_; }
    double v0() const { return v0_; }
    const std::vector<Cut>& cuts() const { return cuts_; }
    int num_cuts() const { return static_cast<int>(cuts_.size()); }

    double evaluate(const Eigen::VectorXd& x) const;
    /// Index of the first cut attaining evaluate(x), or -1 when v0 is strictly larger.
    int active_cut(const Eigen::VectorXd& x) const;
    /// Gradient of the active cut (zero when v0 is active).
    Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const;

    /// Appends the average of the per-scenario linearizations, summed in
    /// ascending scenario order. Throws LengthMismatch on inconsistent input.
    void add_averaged_cut(const std::vector<double>& values, const std::vector<Eigen::VectorXd>& subgradients,
                          const Eigen::VectorXd& anchor, double slack = 0.0, int iteration = 0);
    void add_cut(Cut cut);

    /// Rows theta >= v0 and theta >= cut(x) over variables (x, theta).
    LinearConstraintBlock epigraph_block() const;
    double max_gradient_norm() const { return max_grad_norm_; }

    /// Same model embedded in a larger space whose first dim() coordinates are x.
    LowerModel padded(int new_dim) const;

    /// CSV: iteration,intercept,slack,g_1..g_n,a_1..a_n
    void write_csv(std::ostream& os) const;

private:
    int n_ = 0;
    double v0_ = 0.0;
    std::vector<Cut> cuts_;
    std::vector<double> constants_;
    double max_grad_norm_ = 0.0;
};

/// v0 = (1 / (N (1 - lambda))) * sum_{i=1..N} min over the box of h_i.
double initial_lower_bound(const StationaryInstance& inst);
LowerModel init_lower(const StationaryInstance& inst);

} // namespace eddp
