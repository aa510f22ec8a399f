#pragma once

// Probabilistic PCA, maximum-likelihood closed form with the rotation fixed
// to the identity:
//
//   sigma^2 = mean of the D - q trailing covariance eigenvalues
//   W       = U_q diag(sqrt(max(lambda_i - sigma^2, 0)))
//   encode  z = (W'W + sigma^2 I)^+ W' (x - mu)                (posterior mean)
//   decode  x = W (W'W)^+ (W'W + sigma^2 I) z + mu             (sigma^2 > 0)
//           x = W z + mu                                       (sigma^2 = 0)
//
// decode(encode(x)) is the orthogonal projection of x - mu onto span(U_q).

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace texlat {

/// Eigen-structure of a data set's population covariance (divides by n).
struct PcaBasis {
    Eigen::VectorXd mean;
    Eigen::VectorXd eigenvalues;  // length D, non-increasing, >= 0
    Eigen::MatrixXd directions;   // D x r unit columns (zero for null directions), r = min(n, D)
    std::size_t samples = 0;
};

/// Rows are observations. Rows are sorted lexicographically before any
/// reduction, so the result does not depend on their order. Eigenvectors
/// are signed so their largest-magnitude component is positive; eigenvalues
/// below the numerical-rank tolerance are reported as 0. Uses the n x n Gram
/// matrix when n < D.
PcaBasis analyze(const Eigen::MatrixXd& data);

class PpcaModel {
public:
    PpcaModel(Eigen::VectorXd mean, Eigen::MatrixXd loadings, double noise_variance, Eigen::VectorXd eigenvalues);

    std::size_t input_dim() const { return static_cast<std::size_t>(mean_.size()); }
    std::size_t latent_dim() const { return static_cast<std::size_t>(loadings_.cols()); }

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& loadings() const { return loadings_; }
    double noise_variance() const { return noise_variance_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

    Eigen::VectorXd encode(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd decode(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    /// Row-wise encode of an n x D matrix.
    Eigen::MatrixXd encode_rows(const Eigen::MatrixXd& x) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd loadings_;
    double noise_variance_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd encoder_;  // q x D
    Eigen::MatrixXd decoder_;  // D x q
};

PpcaModel fit_ppca(const PcaBasis& basis, std::size_t latent_dim);
PpcaModel fit_ppca(const Eigen::MatrixXd& data, std::size_t latent_dim);

/// Running fraction of the eigenvalue mass; last entry is exactly 1.
std::vector<double> cumulative_contribution(std::span<const double> eigenvalues);

/// Smallest q >= 1 whose cumulative contribution reaches threshold in (0, 1].
std::size_t choose_dim(std::span<const double> eigenvalues, double threshold);

} // namespace texlat
