#pragma once

#include "eddp/model.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace eddp {

struct UpperPoint {
    Eigen::VectorXd x;
    double value = 0.0;
};

/**
 * Upper model of the cost-to-go: min(vbar0, (1/N) sum_i u_i(x)) with
 *
 *   u_i(x) = min { sum_j s_j v_ij + R * ||x - sum_j s_j x_ij||_inf : s in simplex }
 *
 * the dual of the bounded-slope interpolation max { mu + <rho, x> :
 * mu + <rho, x_ij> <= v_ij, ||rho||_1 <= R } with R = sqrt(n) * M0bar.
 * A scenario with no points contributes vbar0.
 */
class UpperModel {
public:
    UpperModel() = default;
    UpperModel(int n, int N, double vbar0, double M0bar);

    int dim() const { return n_; }
    int num_scenarios() const { return static_cast<int>(points_.size()); }
    double vbar0() const { return vbar0_; }
    double M0bar() const { return M0bar_; }
    /// l1 cap on the slope, sqrt(n) * M0bar.
    double slope_cap() const { return slope_cap_; }
    /// Scenario index i in 1..N.
    const std::vector<UpperPoint>& points(int i) const;
    std::size_t total_points() const;

    void add_point(int i, const Eigen::VectorXd& x, double value);
    double evaluate_scenario(int i, const Eigen::VectorXd& x) const;
    double evaluate(const Eigen::VectorXd& x) const;

    /// CSV: scenario,value,x_1..x_n
    void write_csv(std::ostream& os) const;

private:
    int n_ = 0;
    double vbar0_ = 0.0;
    double M0bar_ = 0.0;
    double slope_cap_ = 0.0;
    std::vector<std::vector<UpperPoint>> points_;
};

/// (1 / (N (1 - lambda))) * sum_{i=1..N} max over the box of h_i.
double initial_upper_bound(const StationaryInstance& inst);
/// Fallback M_h * D + v0.
double crude_upper_bound(const StationaryInstance& inst, double v0);
/// 2 M_h / (1 - lambda).
double default_M0bar(const StationaryInstance& inst);
UpperModel init_upper(const StationaryInstance& inst, double M0bar);

} // namespace eddp
