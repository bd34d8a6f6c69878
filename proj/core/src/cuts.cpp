#include "eddp/cuts.hpp"

#include "eddp/errors.hpp"
#include "eddp/lp.hpp"

#include <algorithm>
#include <ostream>

namespace eddp {

double LowerModel::evaluate(const Eigen::VectorXd& x) const {
    double v = v0_;
    for (std::size_t l = 0; l < cuts_.size(); ++l) v = std::max(v, constants_[l] + cuts_[l].gradient.dot(x));
    return v;
}

int LowerModel::active_cut(const Eigen::VectorXd& x) const {
    int best = -1;
    double v = v0_;
    for (std::size_t l = 0; l < cuts_.size(); ++l) {
        const double c = constants_[l] + cuts_[l].gradient.dot(x);
        if (c > v || (best < 0 && c == v)) {
            v = c;
            best = static_cast<int>(l);
        }
    }
    return best;
}

Eigen::VectorXd LowerModel::subgradient(const Eigen::VectorXd& x) const {
    const int l = active_cut(x);
    return l < 0 ? Eigen::VectorXd::Zero(n_) : cuts_[static_cast<std::size_t>(l)].gradient;
}

void LowerModel::add_averaged_cut(const std::vector<double>& values, const std::vector<Eigen::VectorXd>& subgradients,
                                  const Eigen::VectorXd& anchor, double slack, int iteration) {
    if (values.empty() || values.size() != subgradients.size())
        throw LengthMismatch("need one value and one subgradient per scenario");
    if (anchor.size() != n_) throw LengthMismatch("anchor has wrong length");
    Cut c;
    c.gradient = Eigen::VectorXd::Zero(n_);
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (subgradients[i].size() != n_) throw LengthMismatch("subgradient has wrong length");
        sum += values[i];
        c.gradient += subgradients[i];
    }
    const double inv = 1.0 / static_cast<double>(values.size());
    c.intercept = sum * inv;
    c.gradient *= inv;
    c.anchor = anchor;
    c.iteration = iteration;
    c.slack_correction = slack;
    add_cut(std::move(c));
}

void LowerModel::add_cut(Cut cut) {
    if (cut.gradient.size() != n_ || cut.anchor.size() != n_) throw LengthMismatch("cut has wrong dimension");
    constants_.push_back(cut.constant());
    max_grad_norm_ = std::max(max_grad_norm_, cut.gradient.norm());
    cuts_.push_back(std::move(cut));
}

LinearConstraintBlock LowerModel::epigraph_block() const {
    const int k = num_cuts();
    LinearConstraintBlock blk;
    blk.matrix = Eigen::MatrixXd::Zero(k + 1, n_ + 1);
    blk.rhs.resize(k + 1);
    blk.sense.assign(static_cast<std::size_t>(k + 1), RowSense::Greater);
    blk.coupling = Eigen::MatrixXd::Zero(k + 1, n_);
    blk.matrix(0, n_) = 1.0;
    blk.rhs(0) = v0_;
    for (int l = 0; l < k; ++l) {
        blk.matrix.block(l + 1, 0, 1, n_) = -cuts_[static_cast<std::size_t>(l)].gradient.transpose();
        blk.matrix(l + 1, n_) = 1.0;
        blk.rhs(l + 1) = constants_[static_cast<std::size_t>(l)];
    }
    blk.lower = Eigen::VectorXd::Constant(n_ + 1, -kInf);
    blk.upper = Eigen::VectorXd::Constant(n_ + 1, kInf);
    return blk;
}

LowerModel LowerModel::padded(int new_dim) const {
    if (new_dim < n_) throw DimensionError("cannot pad a model to a smaller dimension");
    LowerModel m(new_dim, v0_);
    for (const auto& c : cuts_) {
        Cut p = c;
        p.gradient = Eigen::VectorXd::Zero(new_dim);
        p.gradient.head(n_) = c.gradient;
        p.anchor = Eigen::VectorXd::Zero(new_dim);
        p.anchor.head(n_) = c.anchor;
        m.add_cut(std::move(p));
    }
    return m;
}

void LowerModel::write_csv(std::ostream& os) const {
    os << "iteration,intercept,slack";
    for (int j = 0; j < n_; ++j) os << ",g" << j + 1;
    for (int j = 0; j < n_; ++j) os << ",a" << j + 1;
    os << '\n';
    os.precision(17);
    for (const auto& c : cuts_) {
        os << c.iteration << ',' << c.intercept << ',' << c.slack_correction;
        for (int j = 0; j < n_; ++j) os << ',' << c.gradient(j);
        for (int j = 0; j < n_; ++j) os << ',' << c.anchor(j);
        os << '\n';
    }
}

double initial_lower_bound(const StationaryInstance& inst) {
    double sum = 0.0;
    for (int i = 1; i <= inst.N(); ++i) sum += inst.scenario(i).cost.min_over_box(inst.lower, inst.upper);
    return sum / (static_cast<double>(inst.N()) * (1.0 - inst.lambda));
}

LowerModel init_lower(const StationaryInstance& inst) { return LowerModel(inst.n, initial_lower_bound(inst)); }

} // namespace eddp
