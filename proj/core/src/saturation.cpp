#include "eddp/saturation.hpp"

#include "eddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace eddp {

SaturationMap::SaturationMap(Eigen::VectorXd lower, Eigen::VectorXd upper, double epsilon, int T)
    : lower_(std::move(lower)), upper_(std::move(upper)), epsilon_(epsilon), T_(T) {
    if (T_ < 2) throw ConfigError("planning horizon T must be at least 2");
    if (lower_.size() == 0 || lower_.size() != upper_.size()) throw ConfigError("box bounds must be non-empty");
    const double D = (upper_ - lower_).maxCoeff();
    if (!(epsilon_ > 0.0)) throw ConfigError("epsilon must be positive");
    if (epsilon_ > D) throw ConfigError("epsilon exceeds the domain length D");
    delta_ = epsilon_ / std::sqrt(static_cast<double>(lower_.size()));
}

CellKey SaturationMap::cell_of(const Eigen::VectorXd& x) const {
    if (x.size() != lower_.size()) throw DimensionError("point has wrong length");
    CellKey key(static_cast<std::size_t>(x.size()));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double v = x(j);
        if (!(v >= lower_(j) - 1e-9 && v <= upper_(j) + 1e-9)) throw OutOfDomain("point outside the box");
        v = std::clamp(v, lower_(j), upper_(j));
        key[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor((v - lower_(j)) / delta_));
    }
    return key;
}

int SaturationMap::level(const Eigen::VectorXd& x) const {
    const auto it = table_.find(cell_of(x));
    return it == table_.end() ? T_ - 1 : it->second;
}

void SaturationMap::lower_level(const Eigen::VectorXd& x, int t) {
    if (t < 0 || t > T_ - 1) throw ConfigError("level outside 0..T-1");
    const CellKey key = cell_of(x);
    auto it = table_.find(key);
    if (it == table_.end()) {
        table_.emplace(key, t);
        drop_ += T_ - 1 - t;
    } else if (t < it->second) {
        drop_ += it->second - t;
        it->second = t;
    }
}

SaturationMap::Selection SaturationMap::select_most_distinguishable(const std::vector<Eigen::VectorXd>& candidates) const {
    if (candidates.empty()) throw EmptyCandidates("no candidate points");
    Selection best{0, level(candidates[0])};
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const int l = level(candidates[i]);
        if (l > best.level) best = {static_cast<int>(i), l};
    }
    return best;
}

void SaturationMap::assign_gap_level(const Eigen::VectorXd& x, double gap, const std::vector<double>& eps) {
    if (static_cast<int>(eps.size()) != T_) throw ScheduleError("schedule length must equal T");
    for (std::size_t t = 1; t < eps.size(); ++t)
        if (!(eps[t] > eps[t - 1])) throw ScheduleError("schedule must be strictly increasing");
    for (int t = 0; t < T_; ++t)
        if (gap <= eps[static_cast<std::size_t>(t)]) {
            lower_level(x, t);
            return;
        }
}

void SaturationMap::write_csv(std::ostream& os) const {
    for (Eigen::Index j = 0; j < lower_.size(); ++j) os << "idx" << j + 1 << ',';
    os << "level\n";
    for (const auto& [key, lvl] : table_) {
        for (auto k : key) os << k << ',';
        os << lvl << '\n';
    }
}

} // namespace eddp
