#include "eddp/pdsa.hpp"

#include "eddp/errors.hpp"
#include "eddp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace eddp {

void SaddleProblem::validate() const {
    const auto d = lower.size();
    const auto m = q.size();
    if (upper.size() != d) throw DimensionError("saddle box bounds differ in length");
    if (W.rows() != m || (m > 0 && W.cols() != d)) throw DimensionError("W must be rows x primal dimension");
    if (U.rows() != m || U.cols() != u.size()) throw DimensionError("U must be rows x length(u)");
    if (f.dim() != d) throw DimensionError("f has the wrong dimension");
    if (static_cast<Eigen::Index>(nonneg.size()) != m) throw DimensionError("one dual-cone flag per row is required");
    for (Eigen::Index j = 0; j < d; ++j)
        if (!std::isfinite(lower(j)) || !std::isfinite(upper(j)) || lower(j) > upper(j))
            throw ConfigError("saddle primal box must be finite and nonempty");
    if (num_samples < 0) throw ConfigError("num_samples must be nonnegative");
    if (num_samples > 0 && !second_stage) throw ConfigError("a sampled term needs a second_stage oracle");
    if (!(G_bar >= 0.0)) throw ConfigError("G_bar must be nonnegative");
    if (x_init.size() != 0 && x_init.size() != d) throw DimensionError("x_init has the wrong length");
    if (y_init.size() != 0) {
        if (y_init.size() != m) throw DimensionError("y_init has the wrong length");
        for (Eigen::Index r = 0; r < m; ++r)
            if (nonneg[static_cast<std::size_t>(r)] && y_init(r) < 0.0) throw ConfigError("y_init leaves the dual cone");
    }
}

double SaddleProblem::primal_value(const Eigen::VectorXd& x) const {
    double v = f.evaluate(x);
    if (num_samples == 0) return v;
    if (expected_value) return v + expected_value(x);
    double s = 0.0;
    for (int i = 0; i < num_samples; ++i) s += second_stage(x, i).value;
    return v + s / num_samples;
}

void PdsaParams::validate() const {
    if (N < 1) throw ConfigError("PDSA needs at least one iteration");
    if (!(w > 0.0) || theta != 1.0) throw ConfigError("PDSA weights must satisfy w theta = w with w > 0");
    if (!(tau > 0.0) || !(eta > 0.0) || !(alpha_X > 0.0)) throw ConfigError("PDSA steps must be positive");
    if (tau * eta * alpha_X < 2.0 * W_norm * W_norm * (1.0 - 1e-12))
        throw ConfigError("PDSA steps violate tau eta alpha >= 2 ||W||^2");
}

double spectral_norm(const Eigen::MatrixXd& W, double tol) {
    if (W.size() == 0 || W.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    // Deterministic start with no special alignment to the coordinate axes.
    Eigen::VectorXd v(W.cols());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(j));
    v.normalize();
    double s2 = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd z = W.transpose() * (W * v);
        const double nz = z.norm();
        if (nz == 0.0) return 0.0;
        v = z / nz;
        if (std::abs(nz - s2) <= tol * nz) {
            s2 = nz;
            break;
        }
        s2 = nz;
    }
    return std::sqrt(s2);
}

double box_diameter(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    return std::sqrt(0.5 * (upper - lower).squaredNorm());
}

PdsaParams default_params(const SaddleProblem& sp, long N) {
    if (N < 1) throw ConfigError("PDSA needs at least one iteration");
    PdsaParams p;
    p.N = N;
    p.alpha_X = 1.0;
    p.W_norm = spectral_norm(sp.W);
    p.D_X = box_diameter(sp.lower, sp.upper);
    const double sa = std::sqrt(p.alpha_X);
    const double wterm = std::sqrt(2.0) * p.W_norm / sa;
    const double gterm = p.D_X > 0.0 ? sp.G_bar * std::sqrt(3.0 * static_cast<double>(N)) / (p.D_X * sa) : 0.0;
    p.eta = std::max(wterm, 1e-12);
    p.tau = std::max({gterm, wterm, 1e-12});
    return p;
}

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, shift = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cum += s[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (s[k] - t > 0.0) shift = t;
    }
    return (v.array() - shift).max(0.0).matrix();
}

} // namespace

Eigen::VectorXd prox_piecewise(const PiecewiseLinearCost& f, const Eigen::VectorXd& c, const Eigen::VectorXd& z,
                               double tau, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    const Eigen::MatrixXd& A = f.gradients;
    if (f.num_pieces() == 1) return clamp_box(z - (A.row(0).transpose() + c) / tau, lower, upper);

    // Dual over the simplex of piece weights: the inner minimizer is a clamp,
    // and the dual is smooth with gradient Lipschitz constant ||A||^2 / tau.
    const int P = f.num_pieces();
    auto x_of = [&](const Eigen::VectorXd& pi) {
        return clamp_box(z - (A.transpose() * pi + c) / tau, lower, upper);
    };
    auto primal = [&](const Eigen::VectorXd& x) {
        return (A * x + f.offsets).maxCoeff() + c.dot(x) + 0.5 * tau * (x - z).squaredNorm();
    };
    auto dual = [&](const Eigen::VectorXd& pi, const Eigen::VectorXd& x) {
        return pi.dot(A * x + f.offsets) + c.dot(x) + 0.5 * tau * (x - z).squaredNorm();
    };
    const double a = spectral_norm(A);
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(P, 1.0 / P);
    Eigen::VectorXd best_x = x_of(pi);
    if (a == 0.0) return best_x;
    const double L = a * a / tau;

    double best_p = primal(best_x), best_d = dual(pi, best_x);
    Eigen::VectorXd zeta = pi;
    double t = 1.0;
    for (int it = 0; it < 20000; ++it) {
        const Eigen::VectorXd xz = x_of(zeta);
        const Eigen::VectorXd next = project_simplex(zeta + (A * xz + f.offsets) / L);
        const Eigen::VectorXd xn = x_of(next);
        const double pv = primal(xn), dv = dual(next, xn);
        if (pv < best_p) {
            best_p = pv;
            best_x = xn;
        }
        best_d = std::max(best_d, dv);
        if (best_p - best_d <= 1e-12 * (1.0 + std::abs(best_p))) break;
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        zeta = next + ((t - 1.0) / tn) * (next - pi);
        pi = next;
        t = tn;
    }
    return best_x;
}

PdsaCertificate run_pdsa(const SaddleProblem& sp, const PdsaParams& params, std::uint64_t seed,
                         const PdsaTrace& trace) {
    sp.validate();
    params.validate();
    const int d = sp.dim();
    const int m = sp.rows();
    const Eigen::VectorXd base = sp.q + sp.U * sp.u;
    const double g_limit = sp.G_bar * (1.0 + 1e-6);

    Eigen::VectorXd x = sp.x_init.size() == d ? sp.x_init : Eigen::VectorXd(0.5 * (sp.lower + sp.upper));
    x = clamp_box(x, sp.lower, sp.upper);
    const Eigen::VectorXd y0 = sp.y_init.size() == m ? sp.y_init : Eigen::VectorXd(Eigen::VectorXd::Zero(m));
    Eigen::VectorXd y = y0, y_prev = y0;
    Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(d), sum_y = Eigen::VectorXd::Zero(m);
    Rng rng(seed);

    if (trace.csv) *trace.csv << "k,y_norm,sample,objective\n";
    for (long k = 1; k <= params.N; ++k) {
        int sample = -1;
        Eigen::VectorXd G = Eigen::VectorXd::Zero(d);
        double sample_value = 0.0;
        if (sp.num_samples > 0) {
            sample = static_cast<int>(rng.below(static_cast<std::uint64_t>(sp.num_samples)));
            StochasticSample s = sp.second_stage(x, sample);
            if (s.subgradient.size() != d) throw DimensionError("second-stage subgradient has the wrong length");
            const double gn = s.subgradient.norm();
            if (gn > g_limit)
                throw OracleError("sampled subgradient norm " + std::to_string(gn) + " exceeds the bound " +
                                  std::to_string(sp.G_bar));
            G = std::move(s.subgradient);
            sample_value = s.value;
        }
        const Eigen::VectorXd y_ext = params.theta * (y - y_prev) + y;
        Eigen::VectorXd c = G;
        if (m > 0) c.noalias() -= sp.W.transpose() * y_ext;
        x = prox_piecewise(sp.f, c, x, params.tau, sp.lower, sp.upper);

        y_prev = y;
        if (m > 0) {
            const Eigen::VectorXd resid = base - sp.W * x;
            y += resid / params.eta;
            for (int r = 0; r < m; ++r)
                if (sp.nonneg[static_cast<std::size_t>(r)]) y(r) = std::max(0.0, y(r));
        }
        sum_x += params.w * x;
        sum_y += params.w * y;

        if (trace.csv) {
            double obj = sp.f.evaluate(x) + sample_value;
            if (m > 0) obj += y.dot(base - sp.W * x);
            *trace.csv << k << ',' << y.norm() << ',' << sample << ',' << obj << '\n';
        }
    }

    const double wsum = params.w * static_cast<double>(params.N);
    PdsaCertificate cert;
    cert.iterations = params.N;
    cert.x_bar = sum_x / wsum;
    cert.y_bar = sum_y / wsum;
    cert.y_last = y;
    cert.delta = (params.w * params.eta / wsum) * (y0 - y);
    cert.eps_c = cert.delta.norm();
    cert.objective = sp.primal_value(cert.x_bar);
    if (m > 0) cert.objective += cert.y_bar.dot(base - sp.W * cert.x_bar);
    cert.u_subgradient = sp.U.transpose() * cert.y_bar;

    // Reported high-probability bounds with sigma = 2 G_bar and ||y*|| <= dual_cap.
    const double Nd = static_cast<double>(params.N);
    const double sa = std::sqrt(params.alpha_X);
    const double G = sp.G_bar, sigma = 2.0 * G;
    double common = params.confidence * params.D_X / std::sqrt(Nd) * sigma;
    if (G > 0.0) {
        common += params.D_X * (10.0 * G * G + sigma * sigma) / (G * std::sqrt(3.0 * params.alpha_X * Nd));
        common += params.confidence * params.D_X / std::sqrt(Nd) * sigma * sigma / (G * std::sqrt(3.0) * sa);
    }
    const double y0n = y0.norm();
    const double wn = std::sqrt(2.0) * params.W_norm / (sa * Nd);
    cert.eps_d = wn * (1.0 + (y0n + params.dual_cap) * (y0n + params.dual_cap)) + common;
    cert.eps_p = wn * (1.0 + y0n * y0n) + common;
    return cert;
}

GapEstimates estimate_gaps(const SaddleProblem& sp, const PdsaCertificate& cert,
                           const std::vector<Eigen::VectorXd>& probe_points, const Eigen::VectorXd& y_star) {
    sp.validate();
    const int m = sp.rows();
    if (y_star.size() != m) throw DimensionError("y_star has the wrong length");
    const Eigen::VectorXd base = sp.q + sp.U * sp.u;
    const Eigen::VectorXd rbar = m > 0 ? Eigen::VectorXd(base - sp.W * cert.x_bar) : Eigen::VectorXd::Zero(0);
    const double fbar = sp.primal_value(cert.x_bar);

    // Largest value of -[<y_bar, base - W x> + F(x)] over the probes.
    double inner = -std::numeric_limits<double>::infinity();
    auto probe = [&](const Eigen::VectorXd& x) {
        if (x.size() != sp.dim()) throw DimensionError("probe point has the wrong length");
        double v = sp.primal_value(x);
        if (m > 0) v += cert.y_bar.dot(base - sp.W * x);
        inner = std::max(inner, -v);
    };
    probe(cert.x_bar);
    for (const auto& x : probe_points) probe(x);
    if (sp.num_samples == 0) {
        // Exact: min over the box of f(x) - <W' y_bar, x> is a piecewise-linear box minimum.
        PiecewiseLinearCost shifted = sp.f;
        if (m > 0) shifted.gradients.rowwise() -= (sp.W.transpose() * cert.y_bar).transpose();
        double v = shifted.min_over_box(sp.lower, sp.upper);
        if (m > 0) v += cert.y_bar.dot(base);
        inner = std::max(inner, -v);
    }

    GapEstimates g;
    g.gap_star = (m > 0 ? y_star.dot(rbar) : 0.0) + fbar + inner;
    const Eigen::VectorXd r = m > 0 ? Eigen::VectorXd(rbar + cert.delta) : Eigen::VectorXd::Zero(0);
    const double tol = 1e-9 * (1.0 + (m > 0 ? base.cwiseAbs().maxCoeff() : 0.0));
    bool polar = true;
    for (int i = 0; i < m; ++i) {
        if (sp.nonneg[static_cast<std::size_t>(i)] ? r(i) > tol : std::abs(r(i)) > tol) polar = false;
    }
    g.gap_delta = polar ? fbar + inner : std::numeric_limits<double>::infinity();
    return g;
}

} // namespace eddp
