#include "texlat/ppca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "texlat/error.hpp"

namespace texlat {
namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v[idx] < 0) v = -v;
}

Eigen::MatrixXd sorted_rows(const Eigen::MatrixXd& data) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (data(a, j) < data(b, j)) return true;
            if (data(b, j) < data(a, j)) return false;
        }
        return false;
    });
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (std::size_t i = 0; i < order.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(order[i]);
    return out;
}

} // namespace

PcaBasis analyze(const Eigen::MatrixXd& data) {
    const auto n = data.rows(), d = data.cols();
    if (n < 2) throw UsageError("PPCA needs at least 2 samples, got " + std::to_string(n));
    if (d < 1) throw UsageError("PPCA needs at least one feature");
    if (!data.allFinite()) throw NumericError("PPCA input contains non-finite values");

    const Eigen::MatrixXd x = sorted_rows(data);
    PcaBasis basis;
    basis.samples = static_cast<std::size_t>(n);
    basis.mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) basis.mean += x.row(i).transpose();
    basis.mean /= static_cast<double>(n);
    const Eigen::MatrixXd centred = x.rowwise() - basis.mean.transpose();

    const Eigen::Index r = std::min(n, d);
    basis.eigenvalues = Eigen::VectorXd::Zero(d);
    basis.directions = Eigen::MatrixXd::Zero(d, r);

    if (n < d) {
        const Eigen::MatrixXd gram = (centred * centred.transpose()) / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
        for (Eigen::Index i = 0; i < r; ++i) {
            const Eigen::Index src = r - 1 - i;
            basis.eigenvalues[i] = std::max(es.eigenvalues()[src], 0.0);
        }
        const double tol = basis.eigenvalues[0] * static_cast<double>(d) * std::numeric_limits<double>::epsilon();
        for (Eigen::Index i = 0; i < r; ++i) {
            const Eigen::Index src = r - 1 - i;
            if (basis.eigenvalues[i] <= tol) {
                basis.eigenvalues[i] = 0.0;
                continue;
            }
            Eigen::VectorXd u = centred.transpose() * es.eigenvectors().col(src);
            u.normalize();
            fix_sign(u);
            basis.directions.col(i) = u;
        }
    } else {
        const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
        for (Eigen::Index i = 0; i < d; ++i) basis.eigenvalues[i] = std::max(es.eigenvalues()[d - 1 - i], 0.0);
        const double tol = basis.eigenvalues[0] * static_cast<double>(d) * std::numeric_limits<double>::epsilon();
        for (Eigen::Index i = 0; i < d; ++i) {
            if (basis.eigenvalues[i] <= tol) basis.eigenvalues[i] = 0.0;
            Eigen::VectorXd u = es.eigenvectors().col(d - 1 - i);
            fix_sign(u);
            basis.directions.col(i) = u;
        }
    }
    return basis;
}

PpcaModel::PpcaModel(Eigen::VectorXd mean, Eigen::MatrixXd loadings, double noise_variance,
                     Eigen::VectorXd eigenvalues)
    : mean_(std::move(mean)),
      loadings_(std::move(loadings)),
      noise_variance_(noise_variance),
      eigenvalues_(std::move(eigenvalues)) {
    if (loadings_.rows() != mean_.size()) throw DataError("PPCA loadings rows do not match the mean length");
    if (loadings_.cols() > mean_.size()) throw DataError("PPCA latent dimension exceeds the input dimension");
    if (eigenvalues_.size() != mean_.size()) throw DataError("PPCA eigenvalue count does not match the input dimension");
    if (!(noise_variance_ >= 0.0) || !std::isfinite(noise_variance_)) throw DataError("PPCA noise variance must be >= 0");
    if (!mean_.allFinite() || !loadings_.allFinite() || !eigenvalues_.allFinite())
        throw DataError("PPCA model contains non-finite values");

    const auto q = loadings_.cols();
    const Eigen::MatrixXd wtw = loadings_.transpose() * loadings_;
    const Eigen::MatrixXd m = wtw + noise_variance_ * Eigen::MatrixXd::Identity(q, q);
    encoder_ = m.completeOrthogonalDecomposition().pseudoInverse() * loadings_.transpose();
    if (noise_variance_ == 0.0) {
        decoder_ = loadings_;
    } else {
        decoder_ = loadings_ * (wtw.completeOrthogonalDecomposition().pseudoInverse() * m);
    }
}

Eigen::VectorXd PpcaModel::encode(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != mean_.size()) {
        throw UsageError("PPCA encode: expected length " + std::to_string(mean_.size()) + ", got " +
                         std::to_string(x.size()));
    }
    return encoder_ * (x - mean_);
}

Eigen::VectorXd PpcaModel::decode(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    if (z.size() != loadings_.cols()) {
        throw UsageError("PPCA decode: expected length " + std::to_string(loadings_.cols()) + ", got " +
                         std::to_string(z.size()));
    }
    return decoder_ * z + mean_;
}

Eigen::MatrixXd PpcaModel::encode_rows(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean_.size()) throw UsageError("PPCA encode: column count does not match the model");
    return (x.rowwise() - mean_.transpose()) * encoder_.transpose();
}

PpcaModel fit_ppca(const PcaBasis& basis, std::size_t latent_dim) {
    const auto d = static_cast<std::size_t>(basis.mean.size());
    const std::size_t limit = std::min(basis.samples - 1, d);
    if (latent_dim < 1 || latent_dim > limit) {
        throw UsageError("PPCA latent dimension " + std::to_string(latent_dim) + " outside [1, " +
                         std::to_string(limit) + "] for " + std::to_string(basis.samples) + " samples of dimension " +
                         std::to_string(d));
    }
    const auto q = static_cast<Eigen::Index>(latent_dim);
    double sigma2 = 0.0;
    if (latent_dim < d) sigma2 = basis.eigenvalues.tail(static_cast<Eigen::Index>(d) - q).mean();

    Eigen::MatrixXd w(static_cast<Eigen::Index>(d), q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const double gain = std::sqrt(std::max(basis.eigenvalues[i] - sigma2, 0.0));
        w.col(i) = basis.directions.col(i) * gain;
    }
    return PpcaModel(basis.mean, std::move(w), sigma2, basis.eigenvalues);
}

PpcaModel fit_ppca(const Eigen::MatrixXd& data, std::size_t latent_dim) {
    const auto n = static_cast<std::size_t>(data.rows()), d = static_cast<std::size_t>(data.cols());
    if (n >= 2 && (latent_dim < 1 || latent_dim > std::min(n - 1, d))) {
        throw UsageError("PPCA latent dimension " + std::to_string(latent_dim) + " outside [1, " +
                         std::to_string(std::min(n - 1, d)) + "]");
    }
    return fit_ppca(analyze(data), latent_dim);
}

std::vector<double> cumulative_contribution(std::span<const double> eigenvalues) {
    if (eigenvalues.empty()) throw UsageError("empty eigenvalue spectrum");
    double total = 0.0;
    for (double l : eigenvalues) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw UsageError("eigenvalues must be finite and non-negative");
        total += l;
    }
    if (total <= 0.0) throw UsageError("all-zero eigenvalue spectrum");
    std::vector<double> ccr(eigenvalues.size());
    double run = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        run += eigenvalues[i];
        ccr[i] = run / total;
    }
    return ccr;
}

std::size_t choose_dim(std::span<const double> eigenvalues, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw UsageError("contribution threshold must lie in (0, 1]");
    const auto ccr = cumulative_contribution(eigenvalues);
    for (std::size_t i = 0; i < ccr.size(); ++i)
        if (ccr[i] >= threshold) return i + 1;
    return ccr.size();
}

} // namespace texlat
