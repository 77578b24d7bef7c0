#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace botdetect {

class GpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KernelKind { rbf };

struct KernelParams {
    double signal_variance = 1.0;
    double lengthscale = 1.0;
    KernelKind kind = KernelKind::rbf;

    bool operator==(const KernelParams&) const = default;
};

/// signal_variance * exp(-|a - b|^2 / (2 lengthscale^2))
double kernel_eval(const KernelParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Gram matrix over the rows of X.
Eigen::MatrixXd kernel_matrix(const KernelParams& p, const Eigen::MatrixXd& X);

/// Zero-mean GP posterior conditioned on (X, y).
struct GPModel {
    Eigen::MatrixXd X;      // t x d, one observation per row
    Eigen::VectorXd y;
    KernelParams kernel;
    double noise = 0.0;
    double jitter = 0.0;    // extra diagonal added to make the factorization succeed
    Eigen::MatrixXd chol;   // lower factor of K + (noise + jitter) I
    Eigen::VectorXd alpha;  // (K + (noise + jitter) I)^-1 y

    Eigen::Index size() const { return X.rows(); }
};

struct Prediction {
    double mean;
    double variance;
};

/// Factorizes K + noise I. On failure retries with jitter 1e-8, growing
/// tenfold per attempt up to 1e-4, and then throws GpError.
GPModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelParams& p, double noise);

Prediction gp_predict(const GPModel& m, const Eigen::VectorXd& q);

double log_marginal_likelihood(const GPModel& m);

/// Grid member with the highest evidence; the earliest wins ties.
KernelParams tune_kernel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const KernelParams> grid, double noise);

/// Lengthscales 2^-4..2^4 crossed with signal variances 2^-2..2^2.
std::vector<KernelParams> default_kernel_grid();

}  // namespace botdetect
