#pragma once

#include "eddp/lp.hpp"
#include "eddp/model.hpp"

#include <utility>
#include <vector>

namespace eddp::detail {

/// Incremental LP assembly with sparse rows; senses other than >= and =
/// are stored negated and mapped back when reading sensitivities.
class LpBuilder {
public:
    int add_var(double lo, double hi, double cost) {
        lower_.push_back(lo);
        upper_.push_back(hi);
        cost_.push_back(cost);
        return static_cast<int>(cost_.size()) - 1;
    }
    int add_vars(int count, double lo, double hi, double cost) {
        const int first = num_vars();
        for (int k = 0; k < count; ++k) add_var(lo, hi, cost);
        return first;
    }
    int num_vars() const { return static_cast<int>(cost_.size()); }
    void set_cost(int j, double c) { cost_[j] = c; }
    void add_cost(int j, double c) { cost_[j] += c; }
    void set_bounds(int j, double lo, double hi) {
        lower_[j] = lo;
        upper_[j] = hi;
    }

    /// Returns a handle usable with sensitivity().
    int add_row(std::vector<std::pair<int, double>> coefs, RowSense sense, double rhs) {
        Row row{std::move(coefs), sense, rhs};
        rows_.push_back(std::move(row));
        return static_cast<int>(rows_.size()) - 1;
    }

    /// Appends a constraint block over variables [offset, offset + block.matrix.cols()).
    /// Returns the handle of the first row.
    int add_block(const LinearConstraintBlock& block, int offset) {
        const int first = static_cast<int>(rows_.size());
        for (int i = 0; i < block.num_rows(); ++i) {
            std::vector<std::pair<int, double>> coefs;
            for (Eigen::Index j = 0; j < block.matrix.cols(); ++j)
                if (block.matrix(i, j) != 0.0) coefs.emplace_back(offset + static_cast<int>(j), block.matrix(i, j));
            add_row(std::move(coefs), block.sense[i], block.rhs(i));
        }
        return first;
    }

    LpProblem build() {
        const int n = num_vars();
        LpProblem p;
        p.objective = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n);
        p.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
        p.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
        int meq = 0, mgeq = 0;
        for (const auto& r : rows_) (r.sense == RowSense::Equal ? meq : mgeq)++;
        p.eq_matrix = Eigen::MatrixXd::Zero(meq, n);
        p.eq_rhs.resize(meq);
        p.geq_matrix = Eigen::MatrixXd::Zero(mgeq, n);
        p.geq_rhs.resize(mgeq);
        dual_index_.assign(rows_.size(), 0);
        dual_sign_.assign(rows_.size(), 1.0);
        int ie = 0, ig = 0;
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const auto& r = rows_[k];
            if (r.sense == RowSense::Equal) {
                for (const auto& [j, v] : r.coefs) p.eq_matrix(ie, j) += v;
                p.eq_rhs(ie) = r.rhs;
                dual_index_[k] = ie++;
            } else {
                const double s = r.sense == RowSense::Less ? -1.0 : 1.0;
                for (const auto& [j, v] : r.coefs) p.geq_matrix(ig, j) += s * v;
                p.geq_rhs(ig) = s * r.rhs;
                dual_index_[k] = meq + ig++;
                dual_sign_[k] = s;
            }
        }
        return p;
    }

    /// d(optimal value)/d(rhs) of a row in its original sense. Valid after build().
    double sensitivity(const LpSolution& sol, int handle) const {
        return dual_sign_[handle] * sol.duals(dual_index_[handle]);
    }

private:
    struct Row {
        std::vector<std::pair<int, double>> coefs;
        RowSense sense;
        double rhs;
    };
    std::vector<double> cost_, lower_, upper_;
    std::vector<Row> rows_;
    std::vector<int> dual_index_;
    std::vector<double> dual_sign_;
};

/// Adds weight * h(x) to the objective for x stored at [offset, offset + h.dim()).
/// Affine h goes straight into the costs; otherwise a free epigraph variable is
/// added. The constant part is accumulated into `constant`.
inline void add_piecewise_cost(LpBuilder& b, const PiecewiseLinearCost& h, int offset, double weight, double& constant) {
    if (h.num_pieces() == 1) {
        for (int j = 0; j < h.dim(); ++j) b.add_cost(offset + j, weight * h.gradients(0, j));
        constant += weight * h.offsets(0);
        return;
    }
    const int eta = b.add_var(-kInf, kInf, weight);
    for (int p = 0; p < h.num_pieces(); ++p) {
        std::vector<std::pair<int, double>> row{{eta, 1.0}};
        for (int j = 0; j < h.dim(); ++j)
            if (h.gradients(p, j) != 0.0) row.emplace_back(offset + j, -h.gradients(p, j));
        b.add_row(std::move(row), RowSense::Greater, h.offsets(p));
    }
}

inline RowSense to_sense(RowKind k) { return k == RowKind::Equality ? RowSense::Equal : RowSense::Greater; }

} // namespace eddp::detail
