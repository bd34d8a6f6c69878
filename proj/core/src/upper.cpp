#include "eddp/upper.hpp"

#include "eddp/errors.hpp"
#include "eddp/lp.hpp"
#include "lp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace eddp {

UpperModel::UpperModel(int n, int N, double vbar0, double M0bar)
    : n_(n), vbar0_(vbar0), M0bar_(M0bar), slope_cap_(std::sqrt(static_cast<double>(n)) * M0bar),
      points_(static_cast<std::size_t>(N)) {
    if (!(M0bar > 0.0)) throw ConfigError("M0bar must be positive");
    if (N < 1) throw ConfigError("upper model needs at least one scenario");
}

const std::vector<UpperPoint>& UpperModel::points(int i) const {
    if (i < 1 || i > num_scenarios()) throw IndexError("upper-model scenario index out of range");
    return points_[static_cast<std::size_t>(i - 1)];
}

std::size_t UpperModel::total_points() const {
    std::size_t s = 0;
    for (const auto& p : points_) s += p.size();
    return s;
}

void UpperModel::add_point(int i, const Eigen::VectorXd& x, double value) {
    if (i < 1 || i > num_scenarios()) throw IndexError("upper-model scenario index out of range");
    if (x.size() != n_) throw DimensionError("upper point has wrong length");
    if (!std::isfinite(value)) throw ConfigError("upper point value must be finite");
    points_[static_cast<std::size_t>(i - 1)].push_back({x, value});
}

double UpperModel::evaluate_scenario(int i, const Eigen::VectorXd& x) const {
    const auto& pts = points(i);
    if (pts.empty()) return vbar0_;
    detail::LpBuilder b;
    const int K = static_cast<int>(pts.size());
    const int s0 = b.num_vars();
    for (const auto& p : pts) b.add_var(0.0, kInf, p.value);
    const int t = b.add_var(0.0, kInf, slope_cap_);
    std::vector<std::pair<int, double>> simplex;
    for (int j = 0; j < K; ++j) simplex.emplace_back(s0 + j, 1.0);
    b.add_row(std::move(simplex), RowSense::Equal, 1.0);
    for (int c = 0; c < n_; ++c) {
        std::vector<std::pair<int, double>> up{{t, 1.0}}, down{{t, 1.0}};
        for (int j = 0; j < K; ++j) {
            const double v = pts[static_cast<std::size_t>(j)].x(c);
            if (v != 0.0) {
                up.emplace_back(s0 + j, v);
                down.emplace_back(s0 + j, -v);
            }
        }
        b.add_row(std::move(up), RowSense::Greater, x(c));
        b.add_row(std::move(down), RowSense::Greater, -x(c));
    }
    const LpSolution s = solve_lp(b.build());
    if (s.status != LpStatus::Optimal) throw NumericalFailure("upper interpolation LP did not solve");
    return std::min(vbar0_, s.objective_value);
}

double UpperModel::evaluate(const Eigen::VectorXd& x) const {
    double sum = 0.0;
    for (int i = 1; i <= num_scenarios(); ++i) sum += evaluate_scenario(i, x);
    return std::min(vbar0_, sum / num_scenarios());
}

void UpperModel::write_csv(std::ostream& os) const {
    os << "scenario,value";
    for (int j = 0; j < n_; ++j) os << ",x" << j + 1;
    os << '\n';
    os.precision(17);
    for (int i = 1; i <= num_scenarios(); ++i)
        for (const auto& p : points(i)) {
            os << i << ',' << p.value;
            for (int j = 0; j < n_; ++j) os << ',' << p.x(j);
            os << '\n';
        }
}

double initial_upper_bound(const StationaryInstance& inst) {
    double sum = 0.0;
    for (int i = 1; i <= inst.N(); ++i) sum += inst.scenario(i).cost.max_over_box(inst.lower, inst.upper);
    return sum / (static_cast<double>(inst.N()) * (1.0 - inst.lambda));
}

double crude_upper_bound(const StationaryInstance& inst, double v0) { return inst.M_h * inst.D + v0; }

double default_M0bar(const StationaryInstance& inst) {
    return std::max(2.0 * inst.M_h / (1.0 - inst.lambda), 1e-12);
}

UpperModel init_upper(const StationaryInstance& inst, double M0bar) {
    return UpperModel(inst.n, inst.N(), initial_upper_bound(inst), M0bar);
}

} // namespace eddp
