#include "botdetect/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Cholesky>

namespace botdetect {

namespace {

constexpr double kJitterStart = 1e-8;
constexpr double kJitterMax = 1e-4;

Eigen::VectorXd cross_kernel(const GPModel& m, const Eigen::VectorXd& q) {
    Eigen::VectorXd k(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) k(i) = kernel_eval(m.kernel, m.X.row(i).transpose(), q);
    return k;
}

std::optional<Eigen::MatrixXd> try_cholesky(const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXd L = llt.matrixL();
    return L;
}

}  // namespace

double kernel_eval(const KernelParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
    const double l = p.lengthscale;
    return p.signal_variance * std::exp(-(a - b).squaredNorm() / (2.0 * l * l));
}

Eigen::MatrixXd kernel_matrix(const KernelParams& p, const Eigen::MatrixXd& X) {
    const Eigen::Index t = X.rows();
    Eigen::MatrixXd K(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        K(i, i) = p.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            K(i, j) = K(j, i) = kernel_eval(p, X.row(i).transpose(), X.row(j).transpose());
        }
    }
    return K;
}

GPModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelParams& p, double noise) {
    if (X.rows() < 1) throw std::invalid_argument("gp_fit: no observations");
    if (X.rows() != y.size()) throw std::invalid_argument("gp_fit: X and y sizes differ");
    if (!(p.signal_variance > 0.0 && p.lengthscale > 0.0)) {
        throw std::invalid_argument("gp_fit: kernel parameters must be positive");
    }
    if (noise < 0.0) throw std::invalid_argument("gp_fit: negative noise");

    GPModel m;
    m.X = X;
    m.y = y;
    m.kernel = p;
    m.noise = noise;

    Eigen::MatrixXd K = kernel_matrix(p, X);
    K.diagonal().array() += noise;
    auto L = try_cholesky(K);
    for (double jitter = kJitterStart; !L && jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        L = try_cholesky(Kj);
        if (L) m.jitter = jitter;
    }
    if (!L) throw GpError("gp_fit: Cholesky factorization failed after jitter escalation");
    m.chol = std::move(*L);
    const Eigen::VectorXd half = m.chol.triangularView<Eigen::Lower>().solve(y);
    m.alpha = m.chol.transpose().triangularView<Eigen::Upper>().solve(half);
    return m;
}

Prediction gp_predict(const GPModel& m, const Eigen::VectorXd& q) {
    if (q.size() != m.X.cols()) throw std::invalid_argument("gp_predict: dimension mismatch");
    const Eigen::VectorXd k = cross_kernel(m, q);
    const double mean = k.dot(m.alpha);
    const Eigen::VectorXd v = m.chol.triangularView<Eigen::Lower>().solve(k);
    const double variance = kernel_eval(m.kernel, q, q) - v.squaredNorm();
    return {mean, std::max(variance, 0.0)};
}

double log_marginal_likelihood(const GPModel& m) {
    const double t = static_cast<double>(m.size());
    return -0.5 * m.y.dot(m.alpha) - m.chol.diagonal().array().log().sum() -
           0.5 * t * std::log(2.0 * std::numbers::pi);
}

KernelParams tune_kernel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const KernelParams> grid, double noise) {
    if (grid.empty()) throw std::invalid_argument("tune_kernel: empty grid");
    std::optional<KernelParams> best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (const auto& p : grid) {
        try {
            const double lml = log_marginal_likelihood(gp_fit(X, y, p, noise));
            if (!std::isfinite(lml)) continue;
            if (!best || lml > best_lml) {
                best = p;
                best_lml = lml;
            }
        } catch (const GpError&) {
            continue;
        }
    }
    if (!best) throw GpError("tune_kernel: no grid candidate could be factorized");
    return *best;
}

std::vector<KernelParams> default_kernel_grid() {
    std::vector<KernelParams> grid;
    for (int ls = -4; ls <= 4; ++ls) {
        for (int sv = -2; sv <= 2; ++sv) {
            grid.push_back({std::ldexp(1.0, sv), std::ldexp(1.0, ls), KernelKind::rbf});
        }
    }
    return grid;
}

}  // namespace botdetect
