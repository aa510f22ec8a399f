#pragma once

// Texture synthesis by descending a weighted statistic distance from
// moment-matched Gaussian noise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "texlat/image.hpp"
#include "texlat/pss.hpp"

namespace texlat {

using GroupWeights = std::array<double, kPssGroups>;

struct SynthesisConfig {
    std::size_t iterations = 50;
    std::uint64_t seed = 0;
    std::size_t size = 64;                 // output side in pixels
    std::optional<GroupWeights> weights;   // default_weights(target) when empty

    // Line search: the first step moves the image by initial_step * pixel std
    // (RMS); later steps start at 1 on the quasi-Newton direction.
    double initial_step = 0.05;
    double shrink = 0.5;
    double armijo = 1e-4;
    std::size_t max_backtracks = 40;
    std::size_t history = 8;  // L-BFGS memory

    void validate() const;
};

struct SynthesisResult {
    Image image;
    std::vector<double> trace;  // distance before the first and after every iteration
};

/// 1 / max(|t_g|^2, 1e-8) per group.
GroupWeights default_weights(const PssVector& target);

/// sum_g w_g |a_g - b_g|^2.
double pss_distance(const PssVector& a, const PssVector& b, const GroupWeights& weights);

/// Gradient of pss_distance(extract_pss(img), target) with respect to the pixels.
Image pss_gradient(const Image& img, const PssVector& target, const GroupWeights& weights);

SynthesisResult synthesize(const PssVector& target, const SynthesisConfig& cfg);

/// Same descent starting from a given image instead of seeded noise.
SynthesisResult synthesize_from(const Image& initial, const PssVector& target, const SynthesisConfig& cfg);

/// The seeded starting image synthesize() uses.
Image initial_noise(const PssVector& target, const SynthesisConfig& cfg);

} // namespace texlat
