#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

namespace eddp {

using CellKey = std::vector<std::int64_t>;

/**
 * Sparse map from hypercube cells of side epsilon / sqrt(n), anchored at
 * the box lower corner, to levels in {0, .., T-1}. Absent cells are at T-1.
 */
class SaturationMap {
public:
    /// Throws ConfigError unless T >= 2 and 0 < epsilon <= max box range.
    SaturationMap(Eigen::VectorXd lower, Eigen::VectorXd upper, double epsilon, int T);

    int T() const { return T_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }

    /// Points within 1e-9 outside the box are clamped; farther ones raise OutOfDomain.
    CellKey cell_of(const Eigen::VectorXd& x) const;
    int level(const Eigen::VectorXd& x) const;
    /// table[cell(x)] = min(previous, t).
    void lower_level(const Eigen::VectorXd& x, int t);

    struct Selection {
        int index;
        int level;
    };
    /// Argmax of level, smallest index on ties. Throws EmptyCandidates.
    Selection select_most_distinguishable(const std::vector<Eigen::VectorXd>& candidates) const;

    /// Lowers the level of x to the t with eps[t-1] < gap <= eps[t] (eps[-1] = -1).
    /// Gaps above eps[T-1] leave the level unchanged. Throws ScheduleError
    /// when the schedule is not strictly increasing or has the wrong length.
    void assign_gap_level(const Eigen::VectorXd& x, double gap, const std::vector<double>& eps_schedule);

    std::size_t touched_cells() const { return table_.size(); }
    /// Sum over touched cells of (T - 1 - level); never decreases.
    long long potential_drop() const { return drop_; }

    /// CSV: idx_1..idx_n,level
    void write_csv(std::ostream& os) const;

private:
    Eigen::VectorXd lower_, upper_;
    double epsilon_, delta_;
    int T_;
    std::map<CellKey, int> table_;
    long long drop_ = 0;
};

} // namespace eddp
