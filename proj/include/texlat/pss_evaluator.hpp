#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "texlat/image.hpp"
#include "texlat/pss.hpp"
#include "texlat/pyramid.hpp"

namespace texlat {

/// Forward and reverse-mode evaluation of the texture statistics for one
/// image size. evaluate() keeps every intermediate needed by gradient(), so
/// an instance is stateful and must not be shared between threads.
struct PssEvaluatorOps;

class PssEvaluator {
public:
    PssEvaluator(std::size_t side, const PssParams& params);

    const PssLayout& layout() const { return layout_; }
    std::size_t side() const { return side_; }

    /// Statistic vector of img. Throws NumericError on any non-finite entry.
    const std::vector<double>& evaluate(const Image& img);

    /// Statistics from the last evaluate() call.
    const std::vector<double>& statistics() const { return stats_; }

    /// Gradient of dot(upstream, statistics) with respect to the pixels of the
    /// image passed to the last evaluate() call.
    Image gradient(std::span<const double> upstream) const;

    /// Variance threshold below which normalized statistics are defined as 0.
    static constexpr double kVarianceFloor = 1e-12;

private:
    friend struct PssEvaluatorOps;

    // Mean-removed copy of an image with its population variance.
    struct Centered {
        std::vector<double> dev;
        double mean = 0.0;
        double var = 0.0;
        bool degenerate() const { return var < kVarianceFloor; }
    };

    struct BandLevel {
        std::size_t side = 0;
        std::vector<std::vector<std::complex<double>>> coeffs;  // per orientation
        std::vector<Centered> magnitude;                        // per orientation
    };

    const Centered& oriented(std::size_t level, std::size_t k) const;
    // Magnitude of band (scale, k) resampled to the grid of finer_scale.
    const Centered& magnitude_at(std::size_t scale, std::size_t k, std::size_t finer_scale) const;

    std::size_t side_;
    std::size_t pixels_;
    PssParams params_;
    PssLayout layout_;
    std::shared_ptr<const PyramidResponses> responses_;

    Centered image_;
    std::size_t argmin_ = 0, argmax_ = 0;
    std::vector<Centered> band_recon_;    // [s*K + k]
    std::vector<Centered> level_recon_;   // [m], m = N is the low-pass
    std::vector<Centered> oriented_low_;  // [k]
    Centered high_;
    std::vector<BandLevel> bands_;        // [s]
    std::vector<Centered> upsampled_;     // [(s*K + k)*N + finer]
    std::vector<double> stats_;
};

} // namespace texlat
