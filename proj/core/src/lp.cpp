#include "eddp/lp.hpp"

#include "eddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace eddp {

const char* to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

LpProblem LpProblem::with_bounds(Eigen::VectorXd c, Eigen::VectorXd lo, Eigen::VectorXd hi) {
    LpProblem p;
    const auto n = c.size();
    p.objective = std::move(c);
    p.lower = std::move(lo);
    p.upper = std::move(hi);
    p.eq_matrix.resize(0, n);
    p.geq_matrix.resize(0, n);
    p.eq_rhs.resize(0);
    p.geq_rhs.resize(0);
    return p;
}

namespace {

void append_row(Eigen::MatrixXd& m, Eigen::VectorXd& rhs, const Eigen::RowVectorXd& a, double b) {
    const auto r = m.rows();
    if (r == 0 && m.cols() != a.size()) m.resize(0, a.size());
    m.conservativeResize(r + 1, Eigen::NoChange);
    m.row(r) = a;
    rhs.conservativeResize(r + 1);
    rhs(r) = b;
}

} // namespace

void LpProblem::add_eq_row(const Eigen::RowVectorXd& a, double rhs) { append_row(eq_matrix, eq_rhs, a, rhs); }
void LpProblem::add_geq_row(const Eigen::RowVectorXd& a, double rhs) { append_row(geq_matrix, geq_rhs, a, rhs); }

namespace {

struct Entry {
    int row;
    double val;
};

class Simplex {
public:
    Simplex(const LpProblem& p, bool bland_only)
        : p_(p), bland_only_(bland_only) {
        n_ = p.num_vars();
        meq_ = p.num_eq();
        mgeq_ = p.num_geq();
        m_ = meq_ + mgeq_;
        ncol_ = n_ + mgeq_ + m_;
        build();
    }

    LpSolution solve();

private:
    enum class Outcome { Optimal, Unbounded };

    void build();
    void refactor();
    void recompute_basics();
    Outcome run_phase(const std::vector<double>& cost);
    void compute_duals(const std::vector<double>& cost, std::vector<double>& y) const;
    double reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const;
    void pivot(int r, const std::vector<double>& alpha);

    const LpProblem& p_;
    bool bland_only_;
    int n_ = 0, meq_ = 0, mgeq_ = 0, m_ = 0, ncol_ = 0;

    std::vector<std::vector<Entry>> cols_;
    std::vector<double> lo_, hi_, x_, rhs_;
    std::vector<int> head_;     // basic variable of each row
    std::vector<int> pos_;      // row of a basic variable, -1 if nonbasic
    Eigen::MatrixXd binv_;
    int pivots_since_refactor_ = 0;
    int refactor_every_ = 50;
    int iterations_ = 0;
    int bland_after_ = 0;
    int iteration_limit_ = 0;
    double dtol_ = kLpFeasTol;
    double ptol_ = kLpFeasTol;
};

void Simplex::build() {
    cols_.assign(ncol_, {});
    lo_.assign(ncol_, 0.0);
    hi_.assign(ncol_, kInf);
    x_.assign(ncol_, 0.0);
    rhs_.assign(m_, 0.0);

    double cmax = 1.0;
    for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(p_.objective(j)));
    double bmax = 1.0;

    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < meq_; ++i) {
            const double v = p_.eq_matrix(i, j);
            if (v != 0.0) cols_[j].push_back({i, v});
        }
        for (int i = 0; i < mgeq_; ++i) {
            const double v = p_.geq_matrix(i, j);
            if (v != 0.0) cols_[j].push_back({meq_ + i, v});
        }
        lo_[j] = p_.lower(j);
        hi_[j] = p_.upper(j);
        if (std::isfinite(lo_[j])) x_[j] = lo_[j];
        else if (std::isfinite(hi_[j])) x_[j] = hi_[j];
        else x_[j] = 0.0;
    }
    for (int i = 0; i < meq_; ++i) rhs_[i] = p_.eq_rhs(i);
    for (int i = 0; i < mgeq_; ++i) rhs_[meq_ + i] = p_.geq_rhs(i);
    for (int i = 0; i < m_; ++i) bmax = std::max(bmax, std::abs(rhs_[i]));
    for (int i = 0; i < mgeq_; ++i) cols_[n_ + i].push_back({meq_ + i, -1.0});

    dtol_ = kLpFeasTol * cmax;
    ptol_ = kLpFeasTol * bmax;

    // Residual of the rows at the initial nonbasic point.
    std::vector<double> r(rhs_);
    for (int j = 0; j < n_; ++j)
        if (x_[j] != 0.0)
            for (const auto& e : cols_[j]) r[e.row] -= e.val * x_[j];

    head_.assign(m_, -1);
    pos_.assign(ncol_, -1);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
        const int art = n_ + mgeq_ + i;
        const bool is_geq = i >= meq_;
        if (is_geq && r[i] <= 0.0) {
            const int s = n_ + (i - meq_);
            head_[i] = s;
            pos_[s] = i;
            x_[s] = -r[i];
            binv_(i, i) = -1.0;
            cols_[art].push_back({i, 1.0});
            lo_[art] = 0.0;
            hi_[art] = 0.0;
            x_[art] = 0.0;
        } else {
            const double sign = r[i] >= 0.0 ? 1.0 : -1.0;
            cols_[art].push_back({i, sign});
            head_[i] = art;
            pos_[art] = i;
            x_[art] = std::abs(r[i]);
            binv_(i, i) = sign;
        }
    }

    refactor_every_ = m_ <= 400 ? 50 : std::max(50, m_ / 2);
    bland_after_ = bland_only_ ? 0 : 10 * (m_ + n_);
    iteration_limit_ = 200 * (m_ + n_) + 5000;
}

void Simplex::refactor() {
    pivots_since_refactor_ = 0;
    if (m_ == 0) return;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
        for (const auto& e : cols_[head_[i]]) b(e.row, i) = e.val;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    const double err = (b * binv_ - Eigen::MatrixXd::Identity(m_, m_)).cwiseAbs().maxCoeff();
    if (!std::isfinite(err) || err > 1e-6) throw NumericalFailure("singular basis during refactorization");
    recompute_basics();
}

void Simplex::recompute_basics() {
    std::vector<double> r(rhs_);
    for (int j = 0; j < ncol_; ++j) {
        if (pos_[j] >= 0 || x_[j] == 0.0) continue;
        for (const auto& e : cols_[j]) r[e.row] -= e.val * x_[j];
    }
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), m_);
    const Eigen::VectorXd xb = binv_ * rv;
    for (int i = 0; i < m_; ++i) x_[head_[i]] = xb(i);
}

void Simplex::compute_duals(const std::vector<double>& cost, std::vector<double>& y) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost[head_[i]];
    const Eigen::VectorXd yv = binv_.transpose() * cb;
    y.assign(yv.data(), yv.data() + m_);
}

double Simplex::reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const {
    double d = cost[j];
    for (const auto& e : cols_[j]) d -= y[e.row] * e.val;
    return d;
}

void Simplex::pivot(int r, const std::vector<double>& alpha) {
    // Rank-one product-form update: B^-1 <- B^-1 - (alpha - e_r) (row_r / alpha_r).
    const Eigen::RowVectorXd prow = binv_.row(r) / alpha[r];
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m_);
    u(r) -= 1.0;
    binv_.noalias() -= u * prow;
    ++pivots_since_refactor_;
}

Simplex::Outcome Simplex::run_phase(const std::vector<double>& cost) {
    std::vector<double> y, alpha(m_);
    int clean_passes = 0;
    for (;;) {
        if (iterations_ > iteration_limit_) throw NumericalFailure("simplex iteration limit exceeded");
        if (pivots_since_refactor_ >= refactor_every_) refactor();
        compute_duals(cost, y);

        const bool bland = iterations_ >= bland_after_;
        int q = -1;
        int dir = 0;
        double best = 0.0;
        for (int j = 0; j < ncol_; ++j) {
            if (pos_[j] >= 0 || lo_[j] == hi_[j]) continue;
            const double d = reduced_cost(j, cost, y);
            int dj = 0;
            const bool at_lo = x_[j] == lo_[j];
            const bool at_hi = x_[j] == hi_[j];
            if (at_lo) {
                if (d < -dtol_) dj = 1;
            } else if (at_hi) {
                if (d > dtol_) dj = -1;
            } else {
                if (d < -dtol_) dj = 1;
                else if (d > dtol_) dj = -1;
            }
            if (dj == 0) continue;
            if (bland) {
                q = j;
                dir = dj;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                q = j;
                dir = dj;
            }
        }

        if (q < 0) {
            // Candidate optimum: refresh the factorization once and re-price.
            if (pivots_since_refactor_ > 0 && clean_passes < 2) {
                refactor();
                ++clean_passes;
                continue;
            }
            return Outcome::Optimal;
        }

        Eigen::Map<Eigen::VectorXd> av(alpha.data(), m_);
        av.setZero();
        for (const auto& e : cols_[q]) av.noalias() += e.val * binv_.col(e.row);

        // Harris two-pass ratio test: bounds relaxed by the feasibility
        // tolerance give a step cap, then the largest pivot under the cap leaves.
        const double range = hi_[q] - lo_[q];
        auto limit = [&](int i, double delta, double slack) {
            const int b = head_[i];
            if (delta < 0.0) return std::isfinite(lo_[b]) ? (x_[b] - lo_[b] + slack) / (-delta) : kInf;
            return std::isfinite(hi_[b]) ? (hi_[b] - x_[b] + slack) / delta : kInf;
        };
        double amax = 0.0;
        for (int i = 0; i < m_; ++i) amax = std::max(amax, std::abs(alpha[i]));
        const double piv_tol = std::max(1e-9, 1e-7 * amax);
        int leave = -1;
        double tmax = range;
        if (bland) {
            // Exact minimum ratio with smallest-index ties keeps Bland's rule finite.
            for (int i = 0; i < m_; ++i) {
                const double delta = -dir * alpha[i];
                if (std::abs(delta) <= piv_tol) continue;
                const double lim = std::max(0.0, limit(i, delta, 0.0));
                const double tie = 1e-12 * std::max(1.0, lim);
                const bool take = leave < 0 ? lim < tmax : lim < tmax - tie || (lim <= tmax + tie && head_[i] < head_[leave]);
                if (take) {
                    tmax = std::min(tmax, lim);
                    leave = i;
                }
            }
        } else {
            double cap = range;
            for (int i = 0; i < m_; ++i) {
                const double delta = -dir * alpha[i];
                if (std::abs(delta) <= piv_tol) continue;
                cap = std::min(cap, limit(i, delta, ptol_));
            }
            if (std::isfinite(cap) && range > cap) {
                double best_piv = 0.0;
                for (int i = 0; i < m_; ++i) {
                    const double delta = -dir * alpha[i];
                    if (std::abs(delta) <= piv_tol) continue;
                    if (limit(i, delta, 0.0) <= cap && std::abs(delta) > best_piv) {
                        best_piv = std::abs(delta);
                        leave = i;
                    }
                }
                tmax = std::max(0.0, limit(leave, -dir * alpha[leave], 0.0));
            } else if (!std::isfinite(cap)) {
                tmax = kInf;
            }
        }

        if (!std::isfinite(tmax)) return Outcome::Unbounded;

        ++iterations_;
        clean_passes = 0;
        const double step = dir * tmax;
        if (step != 0.0) {
            for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha[i];
        }
        if (leave < 0) {
            // Bound flip of the entering variable.
            x_[q] = dir > 0 ? hi_[q] : lo_[q];
            continue;
        }
        x_[q] += step;
        const int out = head_[leave];
        const double delta = -dir * alpha[leave];
        x_[out] = delta < 0.0 ? lo_[out] : hi_[out];
        pos_[out] = -1;
        head_[leave] = q;
        pos_[q] = leave;
        pivot(leave, alpha);
    }
}

LpSolution Simplex::solve() {
    LpSolution sol;
    for (int j = 0; j < n_; ++j) {
        if (lo_[j] > hi_[j]) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
    }

    const int art0 = n_ + mgeq_;
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i)
        if (head_[i] >= art0) need_phase1 = true;

    if (need_phase1) {
        std::vector<double> c1(ncol_, 0.0);
        for (int j = art0; j < ncol_; ++j) c1[j] = 1.0;
        run_phase(c1);
        double infeas = 0.0;
        for (int j = art0; j < ncol_; ++j) infeas += std::abs(x_[j]);
        if (infeas > 1e-8 * std::max(1.0, ptol_ / kLpFeasTol)) {
            sol.status = LpStatus::Infeasible;
            sol.iterations = iterations_;
            return sol;
        }
        for (int j = art0; j < ncol_; ++j) {
            lo_[j] = 0.0;
            hi_[j] = 0.0;
            if (pos_[j] < 0) x_[j] = 0.0;
        }
    }

    std::vector<double> c2(ncol_, 0.0);
    for (int j = 0; j < n_; ++j) c2[j] = p_.objective(j);
    const Outcome out = run_phase(c2);
    sol.iterations = iterations_;
    if (out == Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    std::vector<double> y;
    compute_duals(c2, y);
    sol.status = LpStatus::Optimal;
    sol.x.resize(n_);
    for (int j = 0; j < n_; ++j) {
        double v = x_[j];
        // Snap values that drifted by rounding onto the bound they belong to.
        if (std::isfinite(lo_[j]) && std::abs(v - lo_[j]) <= 1e-12 * std::max(1.0, std::abs(lo_[j]))) v = lo_[j];
        if (std::isfinite(hi_[j]) && std::abs(v - hi_[j]) <= 1e-12 * std::max(1.0, std::abs(hi_[j]))) v = hi_[j];
        sol.x(j) = v;
    }
    sol.duals = Eigen::Map<const Eigen::VectorXd>(y.data(), m_);
    sol.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_costs(j) = reduced_cost(j, c2, y);
    sol.objective_value = p_.objective.dot(sol.x);
    return sol;
}

void validate(const LpProblem& p) {
    const auto n = p.objective.size();
    if (p.lower.size() != n || p.upper.size() != n) throw DimensionError("LP bound vectors do not match objective length");
    if (p.eq_rhs.size() != p.eq_matrix.rows() || (p.eq_matrix.rows() > 0 && p.eq_matrix.cols() != n))
        throw DimensionError("LP equality block shape mismatch");
    if (p.geq_rhs.size() != p.geq_matrix.rows() || (p.geq_matrix.rows() > 0 && p.geq_matrix.cols() != n))
        throw DimensionError("LP >= block shape mismatch");
    auto finite_or_nan = [](const auto& m) { return !m.hasNaN(); };
    if (!finite_or_nan(p.objective) || !finite_or_nan(p.eq_matrix) || !finite_or_nan(p.geq_matrix) ||
        !finite_or_nan(p.eq_rhs) || !finite_or_nan(p.geq_rhs) || !finite_or_nan(p.lower) || !finite_or_nan(p.upper))
        throw NumericalFailure("LP data contains NaN");
}

bool certified(const LpProblem& p, const LpSolution& s) {
    if (s.status != LpStatus::Optimal) return true;
    double bscale = 1.0;
    if (p.num_eq() > 0) bscale = std::max(bscale, p.eq_rhs.cwiseAbs().maxCoeff());
    if (p.num_geq() > 0) bscale = std::max(bscale, p.geq_rhs.cwiseAbs().maxCoeff());
    if (primal_residual(p, s.x) > kLpCertTol * bscale) return false;
    return std::abs(dual_objective(p, s) - s.objective_value) <= kLpCertTol * (1.0 + std::abs(s.objective_value));
}

} // namespace

LpSolution solve_lp(const LpProblem& p) {
    validate(p);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            Simplex s(p, attempt > 0);
            LpSolution sol = s.solve();
            if (certified(p, sol)) return sol;
            last_error = "solution failed certification";
        } catch (const NumericalFailure& e) {
            last_error = e.what();
        }
    }
    throw NumericalFailure(last_error);
}

double parametric_dual(const LpProblem& p, const LpSolution& sol, const Eigen::VectorXd& rhs_direction) {
    if (sol.status != LpStatus::Optimal) throw StatusError("parametric_dual needs an optimal solution");
    if (rhs_direction.size() != p.num_rows() || sol.duals.size() != p.num_rows())
        throw LengthMismatch("rhs direction length differs from the row count");
    return sol.duals.dot(rhs_direction);
}

double primal_residual(const LpProblem& p, const Eigen::VectorXd& x) {
    double r = 0.0;
    if (p.num_eq() > 0) r = std::max(r, (p.eq_matrix * x - p.eq_rhs).cwiseAbs().maxCoeff());
    if (p.num_geq() > 0) r = std::max(r, (p.geq_rhs - p.geq_matrix * x).cwiseMax(0.0).maxCoeff());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        r = std::max(r, p.lower(j) - x(j));
        r = std::max(r, x(j) - p.upper(j));
    }
    return r;
}

double dual_objective(const LpProblem& p, const LpSolution& sol) {
    double v = 0.0;
    const int meq = p.num_eq();
    for (int i = 0; i < meq; ++i) v += sol.duals(i) * p.eq_rhs(i);
    for (int i = 0; i < p.num_geq(); ++i) v += sol.duals(meq + i) * p.geq_rhs(i);
    for (int j = 0; j < p.num_vars(); ++j) {
        const double d = sol.reduced_costs(j);
        if (d == 0.0) continue;
        // A reduced cost is collected at the bound the variable rests on.
        const double bound = std::abs(sol.x(j) - p.lower(j)) <= std::abs(sol.x(j) - p.upper(j)) ? p.lower(j) : p.upper(j);
        if (std::isfinite(bound)) v += d * bound;
        else v += d * sol.x(j);
    }
    return v;
}

} // namespace eddp
