#include "texlat/pss.hpp"

#include <string>

#include "texlat/error.hpp"
#include "texlat/pss_evaluator.hpp"

namespace texlat {

void PssParams::validate() const {
    if (scales < 1) throw UsageError("PSS needs at least one scale");
    if (orientations < 1) throw UsageError("PSS needs at least one orientation");
    if (neighborhood < 3 || neighborhood % 2 == 0) {
        throw UsageError("neighborhood must be odd and >= 3, got " + std::to_string(neighborhood));
    }
}

std::size_t pss_group_size(const PssParams& p, std::size_t group) {
    const std::size_t N = p.scales, K = p.orientations, M = p.neighborhood;
    switch (group) {
    case 1: return 6;
    case 2: return 2 * (N + 1);
    case 3: return N * K * M * M;
    case 4: return M * M * (N + 1);
    case 5: return N * K * K;
    case 6: return K * K * (N + 1);
    case 7: return K * K * N * (N + 1);
    case 8: return N * N * K * K;
    case 9: return N * K + 2;
    case 10: return 1;
    default: throw UsageError("PSS group index " + std::to_string(group) + " outside 1..10");
    }
}

std::size_t pss_dim(const PssParams& params) {
    params.validate();
    std::size_t d = 0;
    for (std::size_t g = 1; g <= kPssGroups; ++g) d += pss_group_size(params, g);
    return d;
}

namespace {

std::string level_name(std::size_t level, std::size_t scales) {
    return level == scales ? "lo" : "s" + std::to_string(level + 1);
}

std::string orient_name(std::size_t k) { return "o" + std::to_string(k); }

} // namespace

PssLayout::PssLayout(const PssParams& params) : params_(params) {
    params.validate();
    std::size_t offset = 0;
    for (std::size_t g = 1; g <= kPssGroups; ++g) {
        groups_[g - 1] = {offset, pss_group_size(params, g)};
        offset += groups_[g - 1].size;
    }
    dim_ = offset;

    const std::size_t N = params.scales, K = params.orientations;
    const long h = static_cast<long>(params.neighborhood / 2);
    auto lags = [&](const std::string& prefix) {
        for (long dy = -h; dy <= h; ++dy)
            for (long dx = -h; dx <= h; ++dx)
                names_.push_back(prefix + ".dy" + std::to_string(dy) + ".dx" + std::to_string(dx));
    };

    names_.reserve(dim_);
    for (const char* s : {"mean", "var", "skew", "kurt", "min", "max"}) names_.push_back(std::string("C1.") + s);
    for (std::size_t m = 0; m <= N; ++m) {
        names_.push_back("C2." + level_name(m, N) + ".skew");
        names_.push_back("C2." + level_name(m, N) + ".kurt");
    }
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k) lags("C3." + level_name(s, N) + "." + orient_name(k));
    for (std::size_t m = 0; m <= N; ++m) lags("C4." + level_name(m, N));
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j)
                names_.push_back("C5." + level_name(s, N) + "." + orient_name(k) + "." + orient_name(j));
    for (std::size_t m = 0; m <= N; ++m)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j)
                names_.push_back("C6." + level_name(m, N) + "." + orient_name(k) + "." + orient_name(j));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m <= N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j)
                    names_.push_back("C7." + level_name(n, N) + "." + orient_name(k) + "." + level_name(m, N) + "." +
                                     orient_name(j));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m < N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j)
                    names_.push_back("C8." + level_name(n, N) + "." + orient_name(k) + "." + level_name(m, N) + "." +
                                     orient_name(j));
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k) names_.push_back("C9." + level_name(s, N) + "." + orient_name(k) + ".mean");
    names_.push_back("C9.lo.mean");
    names_.push_back("C9.hi.mean");
    names_.push_back("C10.hi.var");
}

const PssLayout::Range& PssLayout::group(std::size_t g) const {
    if (g < 1 || g > kPssGroups) throw UsageError("PSS group index " + std::to_string(g) + " outside 1..10");
    return groups_[g - 1];
}

std::span<const double> group_view(const PssVector& v, std::size_t group) {
    const PssLayout layout(v.params);
    if (v.values.size() != layout.dim()) throw DataError("PSS vector length does not match its parameters");
    const auto& r = layout.group(group);
    return std::span<const double>(v.values).subspan(r.offset, r.size);
}

PssVector extract_pss(const Image& img, const PssParams& params) {
    params.validate();
    if (!img.is_square()) throw UsageError("PSS input must be square");
    PssEvaluator eval(img.width(), params);
    return PssVector{params, eval.evaluate(img)};
}

} // namespace texlat
