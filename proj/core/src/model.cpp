#include "eddp/model.hpp"

#include "eddp/errors.hpp"
#include "lp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eddp {

PiecewiseLinearCost PiecewiseLinearCost::affine(const Eigen::VectorXd& gradient, double offset) {
    PiecewiseLinearCost c;
    c.gradients = gradient.transpose();
    c.offsets = Eigen::VectorXd::Constant(1, offset);
    return c;
}

double PiecewiseLinearCost::evaluate(const Eigen::VectorXd& x) const {
    return (gradients * x + offsets).maxCoeff();
}

int PiecewiseLinearCost::active_piece(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd v = gradients * x + offsets;
    Eigen::Index best = 0;
    for (Eigen::Index p = 1; p < v.size(); ++p)
        if (v(p) > v(best)) best = p;
    return static_cast<int>(best);
}

double PiecewiseLinearCost::lipschitz() const {
    double m = 0.0;
    for (Eigen::Index p = 0; p < gradients.rows(); ++p) m = std::max(m, gradients.row(p).norm());
    return m;
}

double PiecewiseLinearCost::max_over_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    double best = -kInf;
    for (Eigen::Index p = 0; p < gradients.rows(); ++p) {
        double v = offsets(p);
        for (Eigen::Index j = 0; j < gradients.cols(); ++j) {
            const double g = gradients(p, j);
            if (g != 0.0) v += std::max(g * lo(j), g * hi(j));
        }
        best = std::max(best, v);
    }
    return best;
}

double PiecewiseLinearCost::min_over_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    const int n = dim();
    if (num_pieces() == 1) {
        double v = offsets(0);
        for (int j = 0; j < n; ++j) {
            const double g = gradients(0, j);
            if (g != 0.0) v += std::min(g * lo(j), g * hi(j));
        }
        return v;
    }
    detail::LpBuilder b;
    for (int j = 0; j < n; ++j) b.add_var(lo(j), hi(j), 0.0);
    const int eta = b.add_var(-kInf, kInf, 1.0);
    for (int p = 0; p < num_pieces(); ++p) {
        std::vector<std::pair<int, double>> row{{eta, 1.0}};
        for (int j = 0; j < n; ++j)
            if (gradients(p, j) != 0.0) row.emplace_back(j, -gradients(p, j));
        b.add_row(std::move(row), RowSense::Greater, offsets(p));
    }
    const LpSolution s = solve_lp(b.build());
    if (s.status != LpStatus::Optimal) throw NumericalFailure("cost minimization over the box failed");
    return s.objective_value;
}

PiecewiseLinearCost PiecewiseLinearCost::concat_sum(const PiecewiseLinearCost& a, const PiecewiseLinearCost& b) {
    PiecewiseLinearCost c;
    const int na = a.dim(), nb = b.dim();
    const int pa = a.num_pieces(), pb = b.num_pieces();
    c.gradients = Eigen::MatrixXd::Zero(pa * pb, na + nb);
    c.offsets.resize(pa * pb);
    for (int i = 0; i < pa; ++i)
        for (int j = 0; j < pb; ++j) {
            const int k = i * pb + j;
            c.gradients.block(k, 0, 1, na) = a.gradients.row(i);
            c.gradients.block(k, na, 1, nb) = b.gradients.row(j);
            c.offsets(k) = a.offsets(i) + b.offsets(j);
        }
    return c;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

void validate_cost(const PiecewiseLinearCost& c, int n, const std::string& where) {
    require(c.num_pieces() >= 1, where + ": cost needs at least one piece");
    require(c.gradients.rows() == c.offsets.size() && c.gradients.cols() == n,
            where + ": cost gradients must be pieces x " + std::to_string(n));
    if (!c.gradients.allFinite() || !c.offsets.allFinite()) throw ConfigError(where + ": cost has non-finite entries");
}

} // namespace

void Scenario::validate(int n) const {
    const auto m = b.size();
    require(A.rows() == m && A.cols() == n, "A must be m x n");
    require(B.rows() == m && B.cols() == n, "B must be m x n");
    require(static_cast<Eigen::Index>(kinds.size()) == m, "one row kind per row of A");
    const auto mphi = r.size();
    require(Q.rows() == mphi && (mphi == 0 || Q.cols() == n), "Q must be m_phi x n");
    require(R.rows() == mphi && (mphi == 0 || R.cols() == n), "R must be m_phi x n");
    validate_cost(cost, n, "scenario");
}

const Scenario& StationaryInstance::scenario(int i) const {
    if (i < 0 || i > N()) throw IndexError("scenario index " + std::to_string(i) + " outside 0.." + std::to_string(N()));
    return i == 0 ? scenario0 : scenarios[static_cast<std::size_t>(i - 1)];
}

void StationaryInstance::finalize_unchecked() {
    require(n >= 1, "state dimension must be positive");
    require(lower.size() == n && upper.size() == n && x0.size() == n, "lower/upper/x0 must have length n");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("discount must lie in (0, 1)");
    if (N() < 1) throw ConfigError("at least one scenario beyond the first stage is required");
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(lower(j)) || !std::isfinite(upper(j)) || lower(j) > upper(j))
            throw ConfigError("box bounds must be finite with lower <= upper");
        if (x0(j) < lower(j) - 1e-9 || x0(j) > upper(j) + 1e-9) throw ConfigError("x0 lies outside the box");
    }
    scenario0.validate(n);
    for (const auto& s : scenarios) s.validate(n);
    D = (upper - lower).maxCoeff();
    M_h = scenario0.cost.lipschitz();
    for (const auto& s : scenarios) M_h = std::max(M_h, s.cost.lipschitz());
}

void StationaryInstance::finalize() {
    finalize_unchecked();
    const LinearConstraintBlock blk = stage_feasible_set(*this, 0, x0);
    detail::LpBuilder b;
    for (int j = 0; j < n; ++j) b.add_var(blk.lower(j), blk.upper(j), 0.0);
    b.add_block(blk, 0);
    const LpSolution s = solve_lp(b.build());
    if (s.status != LpStatus::Optimal) throw InfeasibleRoot("first-stage feasible set X(x0) is empty");
}

LinearConstraintBlock stage_feasible_set(const StationaryInstance& inst, int scenario_index, const Eigen::VectorXd& x_prev) {
    const Scenario& s = inst.scenario(scenario_index);
    if (x_prev.size() != inst.n) throw DimensionError("x_prev has wrong length");
    for (int j = 0; j < inst.n; ++j)
        if (x_prev(j) < inst.lower(j) - 1e-9 || x_prev(j) > inst.upper(j) + 1e-9)
            throw OutOfDomain("x_prev outside the box");
    const int m = s.num_rows(), mphi = s.num_phi_rows(), n = inst.n;
    LinearConstraintBlock blk;
    blk.matrix.resize(m + mphi, n);
    blk.rhs.resize(m + mphi);
    blk.coupling.resize(m + mphi, n);
    blk.sense.resize(static_cast<std::size_t>(m + mphi));
    if (m > 0) {
        blk.matrix.topRows(m) = s.A;
        blk.rhs.head(m) = s.B * x_prev + s.b;
        blk.coupling.topRows(m) = s.B;
    }
    for (int i = 0; i < m; ++i) blk.sense[i] = detail::to_sense(s.kinds[i]);
    if (mphi > 0) {
        blk.matrix.bottomRows(mphi) = s.R;
        blk.rhs.tail(mphi) = s.Q * x_prev - s.r;
        blk.coupling.bottomRows(mphi) = s.Q;
    }
    for (int i = 0; i < mphi; ++i) blk.sense[m + i] = RowSense::Less;
    blk.lower = inst.lower;
    blk.upper = inst.upper;
    return blk;
}

void TwoStageLowerLevel::validate(int n) const {
    const auto m1 = b1.size();
    require(n1 >= 1, "lower-level first stage needs at least one variable");
    require(A1.rows() == m1 && (m1 == 0 || A1.cols() == n1), "A1 must be m1 x n1");
    require(B1.rows() == m1 && (m1 == 0 || B1.cols() == n), "B1 must be m1 x n");
    require(static_cast<Eigen::Index>(kinds1.size()) == m1, "one kind per first-stage row");
    require(lower1.size() == n1 && upper1.size() == n1, "first-stage box must have length n1");
    validate_cost(cost1, n1, "lower first stage");
    for (const auto& s : samples) {
        const auto m2 = s.b.size();
        const auto n2 = s.lower.size();
        require(n2 >= 1 && s.upper.size() == n2, "second-stage box must be non-empty and consistent");
        require(s.A.rows() == m2 && (m2 == 0 || s.A.cols() == n2), "A2 must be m2 x n2");
        require(s.B.rows() == m2 && (m2 == 0 || s.B.cols() == n1), "B2 must be m2 x n1");
        require(static_cast<Eigen::Index>(s.kinds.size()) == m2, "one kind per second-stage row");
        validate_cost(s.cost, static_cast<int>(n2), "second stage");
    }
    if (!(subgradient_bound >= 0.0)) throw ConfigError("subgradient bound must be nonnegative");
}

double HierarchicalInstance::M_D_value() const {
    return M_D > 0.0 ? M_D : 10.0 * top.M_h / (1.0 - top.lambda);
}

void HierarchicalInstance::finalize() {
    top.finalize_unchecked();
    lower.validate(top.n);
    if (!(eps_lo > 0.0)) throw ConfigError("eps_lo must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
    if (eps_lo > eps_regularity) throw ConfigError("eps_lo exceeds the declared regularity constant");
    combined_instance(*this).finalize();
}

StationaryInstance combined_instance(const HierarchicalInstance& h) {
    const StationaryInstance& t = h.top;
    const TwoStageLowerLevel& lo = h.lower;
    const int n = t.n, n1 = lo.n1;
    int n2sum = 0;
    for (const auto& s : lo.samples) n2sum += static_cast<int>(s.lower.size());
    const int N2 = lo.N2();
    const int dim = n + n1 + n2sum;

    StationaryInstance c;
    c.n = dim;
    c.lambda = t.lambda;
    c.lower.resize(dim);
    c.upper.resize(dim);
    c.x0 = Eigen::VectorXd::Zero(dim);
    c.lower.head(n) = t.lower;
    c.upper.head(n) = t.upper;
    c.x0.head(n) = t.x0;
    c.lower.segment(n, n1) = lo.lower1;
    c.upper.segment(n, n1) = lo.upper1;
    c.x0.segment(n, n1) = lo.lower1;
    {
        int off = n + n1;
        for (const auto& s : lo.samples) {
            const auto n2 = s.lower.size();
            c.lower.segment(off, n2) = s.lower;
            c.upper.segment(off, n2) = s.upper;
            c.x0.segment(off, n2) = s.lower;
            off += static_cast<int>(n2);
        }
    }

    int m_low = static_cast<int>(lo.b1.size());
    for (const auto& s : lo.samples) m_low += static_cast<int>(s.b.size());

    // Lower-level cost: f1(z1) + (1/N2) sum_j f2_j(z2_j). Each sample cost is
    // affine or max-of-affine; a sum of maxima is expanded only when every
    // term is affine, otherwise epigraph variables would be required.
    auto lower_cost = [&]() {
        PiecewiseLinearCost acc = lo.cost1;
        for (const auto& s : lo.samples) {
            PiecewiseLinearCost scaled = s.cost;
            if (N2 > 0) {
                scaled.gradients /= N2;
                scaled.offsets /= N2;
            }
            acc = PiecewiseLinearCost::concat_sum(acc, scaled);
        }
        return acc;
    }();
    if (lower_cost.num_pieces() > 64)
        throw ConfigError("combined form needs affine second-stage costs (too many cost pieces)");

    auto lift = [&](const Scenario& s) {
        Scenario out;
        const int m = s.num_rows();
        out.A = Eigen::MatrixXd::Zero(m + m_low, dim);
        out.B = Eigen::MatrixXd::Zero(m + m_low, dim);
        out.b = Eigen::VectorXd::Zero(m + m_low);
        out.kinds = s.kinds;
        if (m > 0) {
            out.A.block(0, 0, m, n) = s.A;
            out.B.block(0, 0, m, n) = s.B;
            out.b.head(m) = s.b;
        }
        int row = m;
        // A1 z1 - B1 x (kind) b1
        const int m1 = static_cast<int>(lo.b1.size());
        if (m1 > 0) {
            out.A.block(row, n, m1, n1) = lo.A1;
            out.A.block(row, 0, m1, n) = -lo.B1;
            out.b.segment(row, m1) = lo.b1;
        }
        for (int i = 0; i < m1; ++i) out.kinds.push_back(lo.kinds1[static_cast<std::size_t>(i)]);
        row += m1;
        int off = n + n1;
        for (const auto& smp : lo.samples) {
            const int m2 = static_cast<int>(smp.b.size());
            const int n2 = static_cast<int>(smp.lower.size());
            if (m2 > 0) {
                out.A.block(row, off, m2, n2) = smp.A;
                out.A.block(row, n, m2, n1) = -smp.B;
                out.b.segment(row, m2) = smp.b;
            }
            for (int i = 0; i < m2; ++i) out.kinds.push_back(smp.kinds[static_cast<std::size_t>(i)]);
            row += m2;
            off += n2;
        }
        const int mphi = s.num_phi_rows();
        out.Q = Eigen::MatrixXd::Zero(mphi, dim);
        out.R = Eigen::MatrixXd::Zero(mphi, dim);
        out.r = s.r;
        if (mphi > 0) {
            out.Q.leftCols(n) = s.Q;
            out.R.leftCols(n) = s.R;
        }
        out.cost = PiecewiseLinearCost::concat_sum(s.cost, lower_cost);
        return out;
    };

    c.scenario0 = lift(t.scenario0);
    for (const auto& s : t.scenarios) c.scenarios.push_back(lift(s));
    c.finalize_unchecked();
    return c;
}

} // namespace eddp
