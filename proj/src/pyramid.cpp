#include "texlat/pyramid.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>

#include "texlat/error.hpp"
#include "texlat/fft.hpp"
#include "texlat/simd/kernels.hpp"

namespace texlat {

using std::numbers::pi;
using cplx = std::complex<double>;

void validate_pyramid_input(std::size_t side, const PyramidParams& params) {
    if (params.scales < 1) throw UsageError("pyramid needs at least one scale");
    if (params.orientations < 1) throw UsageError("pyramid needs at least one orientation");
    if (side == 0 || !std::has_single_bit(side)) {
        throw UsageError("pyramid input side " + std::to_string(side) + " is not a power of two");
    }
    if (params.scales >= 63 || (side >> params.scales) < kMinCoarsestSide) {
        throw UsageError("too many scales (" + std::to_string(params.scales) + ") for a " + std::to_string(side) +
                         "x" + std::to_string(side) + " image");
    }
}

namespace filters {

double radial_lowpass(double r) {
    if (r <= pi / 4) return 2.0;
    if (r >= pi / 2) return 0.0;
    return 2.0 * std::cos(pi / 2 * std::log2(4.0 * r / pi));
}

double radial_highpass(double r) {
    if (r <= pi / 4) return 0.0;
    if (r >= pi / 2) return 1.0;
    return std::cos(pi / 2 * std::log2(2.0 * r / pi));
}

double angular_gain(std::size_t orientations) {
    const double k = static_cast<double>(orientations);
    const double log_alpha =
        (k - 1) * std::log(2.0) + std::lgamma(k) - 0.5 * (std::log(k) + std::lgamma(2.0 * (k - 1) + 1.0));
    return std::exp(log_alpha);
}

double angular(std::size_t k, std::size_t orientations, double theta) {
    double d = theta - pi * static_cast<double>(k) / static_cast<double>(orientations);
    d = std::remainder(d, 2 * pi);  // [-pi, pi]
    if (d >= pi) d -= 2 * pi;
    if (d < -pi / 2 || d >= pi / 2) return 0.0;
    return angular_gain(orientations) * std::pow(std::cos(d), static_cast<double>(orientations - 1));
}

double bandpass(std::size_t k, std::size_t orientations, double r, double theta) {
    return radial_highpass(r) * angular(k, orientations, theta);
}

double initial_lowpass(double r) { return radial_lowpass(r / 2) / 2; }

double initial_highpass(double r) { return radial_highpass(r / 2); }

double bin_radius(std::size_t i, std::size_t j, std::size_t s) {
    const double wy = 2 * pi * static_cast<double>(fft::signed_bin(i, s)) / static_cast<double>(s);
    const double wx = 2 * pi * static_cast<double>(fft::signed_bin(j, s)) / static_cast<double>(s);
    return std::hypot(wx, wy);
}

double bin_angle(std::size_t i, std::size_t j, std::size_t s) {
    const long fy = fft::signed_bin(i, s), fx = fft::signed_bin(j, s);
    if (fy == 0 && fx == 0) return 0.0;
    return std::atan2(static_cast<double>(fy), static_cast<double>(fx));
}

} // namespace filters

namespace {

// Per-level filter samples for one grid side.
struct LevelFilters {
    std::vector<double> low_half;                // L(r)/2
    std::vector<double> high;                    // H(r)
    std::vector<std::vector<double>> oriented;   // H(r) G_k(theta)
};

LevelFilters level_filters(std::size_t n, std::size_t orientations) {
    LevelFilters f;
    f.low_half.resize(n * n);
    f.high.resize(n * n);
    f.oriented.assign(orientations, std::vector<double>(n * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double r = filters::bin_radius(i, j, n);
            const double t = filters::bin_angle(i, j, n);
            const std::size_t idx = i * n + j;
            f.low_half[idx] = filters::radial_lowpass(r) / 2;
            f.high[idx] = filters::radial_highpass(r);
            for (std::size_t k = 0; k < orientations; ++k)
                f.oriented[k][idx] = f.high[idx] * filters::angular(k, orientations, t);
        }
    }
    return f;
}

std::vector<cplx> to_spectrum(const Image& img) {
    std::vector<cplx> s(img.pixels().begin(), img.pixels().end());
    fft::forward(s, img.width());
    return s;
}

Image real_part(std::vector<cplx> spectrum, std::size_t n) {
    fft::inverse(spectrum, n);
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real();
    return Image(n, n, std::move(out));
}

void check_layout(const Pyramid& pyr) {
    const auto& p = pyr.params;
    try {
        validate_pyramid_input(pyr.side, p);
    } catch (const UsageError& e) {
        throw DataError(std::string("inconsistent pyramid: ") + e.what());
    }
    if (pyr.bands.size() != p.scales * p.orientations) throw DataError("inconsistent pyramid: band count");
    for (std::size_t s = 0; s < p.scales; ++s) {
        for (std::size_t k = 0; k < p.orientations; ++k) {
            const auto& b = pyr.band(s, k);
            const std::size_t n = pyr.level_side(s);
            if (b.side != n || b.values.size() != n * n) {
                throw DataError("inconsistent pyramid: band (" + std::to_string(s) + ", " + std::to_string(k) +
                                ") has the wrong grid size");
            }
        }
    }
    const std::size_t lo = pyr.level_side(p.scales);
    if (pyr.lowpass.width() != lo || pyr.lowpass.height() != lo) throw DataError("inconsistent pyramid: low-pass size");
    if (pyr.highpass.width() != pyr.side || pyr.highpass.height() != pyr.side)
        throw DataError("inconsistent pyramid: high-pass size");
}

} // namespace

const ComplexGrid& Pyramid::band(std::size_t scale, std::size_t orientation) const {
    if (scale >= params.scales || orientation >= params.orientations) {
        throw UsageError("band index (" + std::to_string(scale) + ", " + std::to_string(orientation) +
                         ") out of range");
    }
    return bands[scale * params.orientations + orientation];
}

ComplexGrid& Pyramid::band(std::size_t scale, std::size_t orientation) {
    return const_cast<ComplexGrid&>(std::as_const(*this).band(scale, orientation));
}

Pyramid combine(double a, const Pyramid& p, double b, const Pyramid& q) {
    check_layout(p);
    check_layout(q);
    if (!(p.params == q.params) || p.side != q.side) throw UsageError("combine: pyramids differ in layout");
    Pyramid out = p;
    for (std::size_t i = 0; i < out.bands.size(); ++i)
        for (std::size_t j = 0; j < out.bands[i].values.size(); ++j)
            out.bands[i].values[j] = a * p.bands[i].values[j] + b * q.bands[i].values[j];
    for (std::size_t j = 0; j < out.lowpass.size(); ++j)
        out.lowpass.pixels()[j] = a * p.lowpass.pixels()[j] + b * q.lowpass.pixels()[j];
    for (std::size_t j = 0; j < out.highpass.size(); ++j)
        out.highpass.pixels()[j] = a * p.highpass.pixels()[j] + b * q.highpass.pixels()[j];
    return out;
}

Pyramid build_pyramid(const Image& img, const PyramidParams& params) {
    if (!img.is_square()) throw UsageError("pyramid input must be square");
    const std::size_t side = img.width();
    validate_pyramid_input(side, params);
    const auto& kern = simd::kernels();

    Pyramid pyr;
    pyr.params = params;
    pyr.side = side;
    pyr.bands.resize(params.scales * params.orientations);

    const auto spectrum = to_spectrum(img);
    std::vector<double> h0(side * side), l0(side * side);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const double r = filters::bin_radius(i, j, side);
            h0[i * side + j] = filters::initial_highpass(r);
            l0[i * side + j] = filters::initial_lowpass(r);
        }
    }
    auto hi = spectrum;
    kern.scale_complex(hi.data(), h0.data(), hi.size());
    pyr.highpass = real_part(std::move(hi), side);

    auto lo = spectrum;
    kern.scale_complex(lo.data(), l0.data(), lo.size());

    for (std::size_t s = 0; s < params.scales; ++s) {
        const std::size_t n = side >> s;
        const auto f = level_filters(n, params.orientations);
        for (std::size_t k = 0; k < params.orientations; ++k) {
            auto band = lo;
            kern.scale_complex(band.data(), f.oriented[k].data(), band.size());
            fft::inverse(band, n);
            pyr.band(s, k) = ComplexGrid{n, std::move(band)};
        }
        kern.scale_complex(lo.data(), f.low_half.data(), lo.size());
        lo = fft::crop(lo, n, n / 2);
        for (auto& v : lo) v *= 0.25;
    }
    pyr.lowpass = real_part(std::move(lo), side >> params.scales);
    return pyr;
}

Image collapse(const Pyramid& pyr) {
    check_layout(pyr);
    const auto& params = pyr.params;
    const auto& kern = simd::kernels();

    auto acc = to_spectrum(pyr.lowpass);
    for (std::size_t s = params.scales; s-- > 0;) {
        const std::size_t n = pyr.level_side(s);
        const auto f = level_filters(n, params.orientations);
        acc = fft::pad(acc, n / 2, n);
        for (auto& v : acc) v *= 4.0;
        kern.scale_complex(acc.data(), f.low_half.data(), acc.size());
        for (std::size_t k = 0; k < params.orientations; ++k) {
            auto z = pyr.band(s, k).values;
            fft::forward(z, n);
            kern.scale_complex(z.data(), f.oriented[k].data(), z.size());
            // Real part of the band: Z(w) + conj(Z(-w)).
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t mi = fft::mirror_bin(i, n);
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t mj = fft::mirror_bin(j, n);
                    acc[i * n + j] += z[i * n + j] + std::conj(z[mi * n + mj]);
                }
            }
        }
    }

    const std::size_t side = pyr.side;
    std::vector<double> h0(side * side), l0(side * side);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const double r = filters::bin_radius(i, j, side);
            h0[i * side + j] = filters::initial_highpass(r);
            l0[i * side + j] = filters::initial_lowpass(r);
        }
    }
    kern.scale_complex(acc.data(), l0.data(), acc.size());
    auto hi = to_spectrum(pyr.highpass);
    kern.accumulate_complex(hi.data(), h0.data(), acc.data(), acc.size());
    return real_part(std::move(acc), side);
}

namespace {

Pyramid zeroed_like(const Pyramid& pyr) {
    check_layout(pyr);
    Pyramid z = pyr;
    for (auto& b : z.bands) std::fill(b.values.begin(), b.values.end(), cplx{});
    std::fill(z.lowpass.pixels().begin(), z.lowpass.pixels().end(), 0.0);
    std::fill(z.highpass.pixels().begin(), z.highpass.pixels().end(), 0.0);
    return z;
}

} // namespace

Image reconstruct_band(const Pyramid& pyr, std::size_t scale, std::size_t orientation) {
    Pyramid z = zeroed_like(pyr);
    z.band(scale, orientation) = pyr.band(scale, orientation);
    return collapse(z);
}

Image reconstruct_lowpass(const Pyramid& pyr) {
    Pyramid z = zeroed_like(pyr);
    z.lowpass = pyr.lowpass;
    return collapse(z);
}

Image reconstruct_highpass(const Pyramid& pyr) {
    Pyramid z = zeroed_like(pyr);
    z.highpass = pyr.highpass;
    return collapse(z);
}

PyramidResponses::PyramidResponses(std::size_t side, const PyramidParams& params) : side_(side), params_(params) {
    validate_pyramid_input(side, params);
    const std::size_t n2 = side * side, K = params.orientations, N = params.scales;
    analysis_.assign(N * K, std::vector<double>(n2));
    reconstruction_.assign(N * K, std::vector<double>(n2));
    oriented_lowpass_.assign(K, std::vector<double>(n2));
    lowpass_.assign(n2, 0.0);
    highpass_.assign(n2, 0.0);

    std::vector<double> ang(K), ang_pair(K);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const std::size_t idx = i * side + j;
            const double r = filters::bin_radius(i, j, side);
            const double t = filters::bin_angle(i, j, side);
            for (std::size_t k = 0; k < K; ++k) {
                ang[k] = filters::angular(k, K, t);
                const double opp = filters::angular(k, K, t + pi);
                ang_pair[k] = ang[k] * ang[k] + opp * opp;
            }
            const double h0 = filters::initial_highpass(r);
            highpass_[idx] = h0 * h0;
            // Cumulative low-pass gain reaching scale s, with level s sampled at r * 2^s.
            double pre = filters::initial_lowpass(r);
            double scale_r = r;
            for (std::size_t s = 0; s < N; ++s) {
                const double h = filters::radial_highpass(scale_r);
                for (std::size_t k = 0; k < K; ++k) {
                    analysis_[s * K + k][idx] = pre * h * ang[k];
                    reconstruction_[s * K + k][idx] = pre * pre * h * h * ang_pair[k];
                }
                pre *= filters::radial_lowpass(scale_r) / 2;
                scale_r *= 2;
            }
            lowpass_[idx] = pre * pre;
            for (std::size_t k = 0; k < K; ++k) oriented_lowpass_[k][idx] = lowpass_[idx] * ang_pair[k];
        }
    }
}

const std::vector<double>& PyramidResponses::band_analysis(std::size_t scale, std::size_t orientation) const {
    if (scale >= params_.scales || orientation >= params_.orientations) throw UsageError("band index out of range");
    return analysis_[scale * params_.orientations + orientation];
}

const std::vector<double>& PyramidResponses::band_reconstruction(std::size_t scale, std::size_t orientation) const {
    if (scale >= params_.scales || orientation >= params_.orientations) throw UsageError("band index out of range");
    return reconstruction_[scale * params_.orientations + orientation];
}

const std::vector<double>& PyramidResponses::oriented_lowpass(std::size_t orientation) const {
    if (orientation >= params_.orientations) throw UsageError("orientation index out of range");
    return oriented_lowpass_[orientation];
}

std::shared_ptr<const PyramidResponses> PyramidResponses::get(std::size_t side, const PyramidParams& params) {
    static std::mutex mutex;
    static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::shared_ptr<const PyramidResponses>> cache;
    const auto key = std::make_tuple(side, params.scales, params.orientations);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto made = std::make_shared<const PyramidResponses>(side, params);
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(made)).first->second;
}

} // namespace texlat
