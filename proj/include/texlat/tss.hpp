#pragma once

// Texture similarity score: the largest cosine similarity between a sample
// and any stride-1 patch of a source image, on raw pixel vectors.

#include <cstddef>
#include <span>
#include <vector>

#include "texlat/hppca.hpp"
#include "texlat/image.hpp"
#include "texlat/synthesis.hpp"

namespace texlat {

inline constexpr std::size_t kDefaultPatch = 19;

struct TssReport {
    double tss = 0.0;
    std::size_t patch = 0;
    std::size_t candidates = 0;
    std::size_t x = 0, y = 0;  // top-left of the best patch (first in row-major order on ties)
};

/// sample must be patch x patch; zero-norm vectors score 0.
TssReport tss(const Image& sample, const Image& source, std::size_t patch = kDefaultPatch);

/// Mean of per-sample TSS over the non-overlapping patch x patch tiles of a
/// centred grid on image, each scored against source.
double grid_tss(const Image& image, const Image& source, std::size_t patch = kDefaultPatch);

struct EvalRow {
    double tss = 0.0;        // grid_tss of the synthesis against the source image
    double pss_error = 0.0;  // |decode(encode(v)) - v| / |v|
    std::vector<double> trace;
};

/// extract -> encode -> decode -> synthesize -> grid_tss, per image. Image i
/// is synthesized with seed cfg.seed + i at the image's own size. Rows are in
/// input order for any job count.
std::vector<EvalRow> evaluate_model(const HppcaModel& model, std::span<const Image> images,
                                    const SynthesisConfig& cfg, std::size_t patch = kDefaultPatch,
                                    std::size_t jobs = 1);

} // namespace texlat
