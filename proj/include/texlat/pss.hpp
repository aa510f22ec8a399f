#pragma once

// Texture statistic vector: ten groups of marginal, auto-correlation and
// cross-correlation statistics over a steerable pyramid, flattened in group
// order C1..C10.
//
//   C1   6          pixel mean, variance, skewness, kurtosis, min, max
//   C2   2(N+1)     skewness, kurtosis of each scale reconstruction (+ low-pass)
//   C3   N K M^2    M x M autocorrelation of each band reconstruction
//   C4   M^2 (N+1)  M x M autocorrelation of each scale reconstruction (+ low-pass)
//   C5   N K^2      per-scale correlations of band magnitudes
//   C6   K^2 (N+1)  per-level correlations of oriented reconstructions
//   C7   K^2 N(N+1) correlations of oriented reconstructions across level pairs
//   C8   N^2 K^2    correlations of band magnitudes across all band pairs
//   C9   N K + 2    means of band, low-pass and high-pass reconstructions
//   C10  1          variance of the high-pass reconstruction
//
// Level N (0-based) is the low-pass residual; its oriented images are the
// low-pass reconstruction split by the angular windows.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "texlat/image.hpp"
#include "texlat/pyramid.hpp"

namespace texlat {

struct PssParams {
    std::size_t scales = 4;
    std::size_t orientations = 4;
    std::size_t neighborhood = 7;

    void validate() const;
    PyramidParams pyramid() const { return {scales, orientations}; }

    friend bool operator==(const PssParams&, const PssParams&) = default;
};

inline constexpr std::size_t kPssGroups = 10;

class PssLayout {
public:
    struct Range {
        std::size_t offset = 0;
        std::size_t size = 0;
    };

    explicit PssLayout(const PssParams& params);

    const PssParams& params() const { return params_; }
    std::size_t dim() const { return dim_; }
    /// 1-based group index; throws UsageError outside 1..10.
    const Range& group(std::size_t g) const;
    /// Column names such as "C3.s2.o1.dy-3.dx2".
    const std::vector<std::string>& names() const { return names_; }

private:
    PssParams params_;
    std::array<Range, kPssGroups> groups_{};
    std::size_t dim_ = 0;
    std::vector<std::string> names_;
};

/// Closed-form group sizes; 1-based group index.
std::size_t pss_group_size(const PssParams& params, std::size_t group);
std::size_t pss_dim(const PssParams& params);

struct PssVector {
    PssParams params;
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

/// Contiguous slice of group g (1..10).
std::span<const double> group_view(const PssVector& v, std::size_t group);

PssVector extract_pss(const Image& img, const PssParams& params);

} // namespace texlat
