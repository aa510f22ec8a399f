#include "texlat/pss_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "texlat/error.hpp"
#include "texlat/fft.hpp"
#include "texlat/simd/kernels.hpp"

namespace texlat {
namespace {

using cplx = std::complex<double>;

std::vector<cplx> to_complex(std::span<const double> v) { return std::vector<cplx>(v.begin(), v.end()); }

std::vector<double> real_of(const std::vector<cplx>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

// Real image with spectrum spectrum * t, where t is a real, even response.
std::vector<double> filtered(const std::vector<cplx>& spectrum, const std::vector<double>& t, std::size_t n) {
    auto s = spectrum;
    simd::kernels().scale_complex(s.data(), t.data(), s.size());
    fft::inverse(s, n);
    return real_of(s);
}

// Band-limited interpolation of an a x a real grid onto b x b (b >= a).
std::vector<double> upsample(std::span<const double> m, std::size_t a, std::size_t b) {
    auto s = to_complex(m);
    fft::forward(s, a);
    auto p = fft::pad(s, a, b);
    fft::inverse(p, b);
    const double gain = static_cast<double>(b * b) / static_cast<double>(a * a);
    std::vector<double> out(b * b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[i].real() * gain;
    return out;
}

// Adjoint of upsample.
std::vector<double> upsample_adjoint(std::span<const double> w, std::size_t a, std::size_t b) {
    auto s = to_complex(w);
    fft::forward(s, b);
    auto c = fft::crop(s, b, a);
    fft::inverse(c, a);
    return real_of(c);
}

// Sum over pixels p of x[p] * x[p + (dy, dx)] with circular wrap.
double shifted_dot(const std::vector<double>& x, std::size_t n, long dy, long dx) {
    const auto& k = simd::kernels();
    const auto ln = static_cast<long>(n);
    const auto sx = static_cast<std::size_t>(((dx % ln) + ln) % ln);
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
        const double* a = x.data() + y * n;
        const double* b = x.data() + static_cast<std::size_t>((((static_cast<long>(y) + dy) % ln) + ln) % ln) * n;
        s += k.dot(a, b + sx, n - sx) + k.dot(a + n - sx, b, sx);
    }
    return s;
}

// g[p] += alpha * x[p + (dy, dx)] with circular wrap.
void accumulate_shifted(std::vector<double>& g, const std::vector<double>& x, std::size_t n, long dy, long dx,
                        double alpha) {
    const auto& k = simd::kernels();
    const auto ln = static_cast<long>(n);
    const auto sx = static_cast<std::size_t>(((dx % ln) + ln) % ln);
    for (std::size_t y = 0; y < n; ++y) {
        double* gy = g.data() + y * n;
        const double* b = x.data() + static_cast<std::size_t>((((static_cast<long>(y) + dy) % ln) + ln) % ln) * n;
        k.axpy(alpha, b + sx, gy, n - sx);
        k.axpy(alpha, b, gy + n - sx, sx);
    }
}

} // namespace

// Shared helpers operating on the private Centered type.
struct PssEvaluatorOps {
    using Centered = PssEvaluator::Centered;

    static Centered center(std::vector<double> v) {
        const auto& k = simd::kernels();
        Centered c;
        const double n = static_cast<double>(v.size());
        c.mean = k.sum(v.data(), v.size()) / n;
        for (auto& x : v) x -= c.mean;
        c.var = k.dot(v.data(), v.data(), v.size()) / n;
        c.dev = std::move(v);
        return c;
    }

    static double correlation(const Centered& a, const Centered& b) {
        if (a.degenerate() || b.degenerate()) return 0.0;
        const double n = static_cast<double>(a.dev.size());
        return simd::kernels().dot(a.dev.data(), b.dev.data(), a.dev.size()) / n / std::sqrt(a.var * b.var);
    }

    static void correlation_backward(const Centered& a, const Centered& b, double w, std::vector<double>& ga,
                                     std::vector<double>& gb) {
        if (w == 0.0 || a.degenerate() || b.degenerate()) return;
        const auto& k = simd::kernels();
        const double n = static_cast<double>(a.dev.size());
        const double rho = correlation(a, b);
        const double cross = w / (n * std::sqrt(a.var * b.var));
        k.axpy(cross, b.dev.data(), ga.data(), ga.size());
        k.axpy(-w * rho / (n * a.var), a.dev.data(), ga.data(), ga.size());
        k.axpy(cross, a.dev.data(), gb.data(), gb.size());
        k.axpy(-w * rho / (n * b.var), b.dev.data(), gb.data(), gb.size());
    }

    // Standardized third and fourth moments; 0 at zero variance.
    static std::pair<double, double> skew_kurt(const Centered& x) {
        if (x.degenerate()) return {0.0, 0.0};
        const auto p = simd::kernels().central_power_sums(x.dev.data(), x.dev.size(), 0.0);
        const double n = static_cast<double>(x.dev.size());
        return {p.s3 / n / std::pow(x.var, 1.5), p.s4 / n / (x.var * x.var)};
    }

    static void skew_kurt_backward(const Centered& x, double w_skew, double w_kurt, std::vector<double>& g) {
        if ((w_skew == 0.0 && w_kurt == 0.0) || x.degenerate()) return;
        const auto p = simd::kernels().central_power_sums(x.dev.data(), x.dev.size(), 0.0);
        const double n = static_cast<double>(x.dev.size());
        const double v = x.var, m3 = p.s3 / n, m4 = p.s4 / n;
        const double a2 = 3.0 * w_skew / std::pow(v, 1.5) / n;
        const double a1 = -3.0 * w_skew * m3 / std::pow(v, 2.5) / n - 4.0 * w_kurt * m4 / (v * v * v) / n;
        const double a3 = 4.0 * w_kurt / (v * v) / n;
        std::vector<double> local(x.dev.size());
        double total = 0.0;
        for (std::size_t i = 0; i < local.size(); ++i) {
            const double t = x.dev[i];
            local[i] = a1 * t + a2 * t * t + a3 * t * t * t;
            total += local[i];
        }
        const double shift = total / n;  // derivative through the mean removal
        for (std::size_t i = 0; i < local.size(); ++i) g[i] += local[i] - shift;
    }

    static void autocorrelation(const Centered& x, std::size_t n, std::size_t m, double* out) {
        std::fill(out, out + m * m, 0.0);
        if (x.degenerate()) return;
        const long h = static_cast<long>(m / 2);
        const double pixels = static_cast<double>(n * n);
        for (long dy = 0; dy <= h; ++dy) {
            for (long dx = -h; dx <= h; ++dx) {
                if (dy == 0 && dx < 0) continue;
                const double a = shifted_dot(x.dev, n, dy, dx) / pixels / x.var;
                out[(dy + h) * static_cast<long>(m) + dx + h] = a;
                out[(h - dy) * static_cast<long>(m) + h - dx] = a;
            }
        }
    }

    static void autocorrelation_backward(const Centered& x, std::size_t n, std::size_t m, const double* w,
                                         const double* values, std::vector<double>& g) {
        if (x.degenerate()) return;
        const long h = static_cast<long>(m / 2);
        const auto lm = static_cast<long>(m);
        const double pixels = static_cast<double>(n * n);
        double dvar = 0.0;
        for (std::size_t i = 0; i < m * m; ++i) dvar -= w[i] * values[i] / x.var;
        for (long dy = 0; dy <= h; ++dy) {
            for (long dx = -h; dx <= h; ++dx) {
                if (dy == 0 && dx < 0) continue;
                const bool centre = dy == 0 && dx == 0;
                double coef = w[(dy + h) * lm + dx + h] / x.var;
                if (!centre) coef += w[(h - dy) * lm + h - dx] / x.var;
                else coef += dvar;
                if (coef == 0.0) continue;
                accumulate_shifted(g, x.dev, n, dy, dx, coef / pixels);
                accumulate_shifted(g, x.dev, n, -dy, -dx, coef / pixels);
            }
        }
    }
};

PssEvaluator::PssEvaluator(std::size_t side, const PssParams& params)
    : side_(side), pixels_(side * side), params_(params), layout_(params) {
    validate_pyramid_input(side, params.pyramid());
    if (params.neighborhood / 2 >= side) {
        throw UsageError("neighborhood " + std::to_string(params.neighborhood) + " too large for a " +
                         std::to_string(side) + "x" + std::to_string(side) + " image");
    }
    responses_ = PyramidResponses::get(side, params.pyramid());
}

const PssEvaluator::Centered& PssEvaluator::oriented(std::size_t level, std::size_t k) const {
    return level == params_.scales ? oriented_low_[k] : band_recon_[level * params_.orientations + k];
}

const PssEvaluator::Centered& PssEvaluator::magnitude_at(std::size_t scale, std::size_t k,
                                                         std::size_t finer_scale) const {
    if (finer_scale == scale) return bands_[scale].magnitude[k];
    return upsampled_[(scale * params_.orientations + k) * params_.scales + finer_scale];
}

const std::vector<double>& PssEvaluator::evaluate(const Image& img) {
    using Ops = PssEvaluatorOps;
    if (img.width() != side_ || img.height() != side_) {
        throw UsageError("evaluator built for " + std::to_string(side_) + "x" + std::to_string(side_) +
                         " images, got " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    const std::size_t N = params_.scales, K = params_.orientations, M = params_.neighborhood;
    const auto& resp = *responses_;

    // Pixel-domain marginals.
    const auto px = img.pixels();
    argmin_ = static_cast<std::size_t>(std::min_element(px.begin(), px.end()) - px.begin());
    argmax_ = static_cast<std::size_t>(std::max_element(px.begin(), px.end()) - px.begin());
    image_ = Ops::center(std::vector<double>(px.begin(), px.end()));

    // Full-resolution reconstructions through the composite responses.
    const auto spectrum = [&] {
        auto s = to_complex(px);
        fft::forward(s, side_);
        return s;
    }();
    band_recon_.clear();
    level_recon_.clear();
    oriented_low_.clear();
    for (std::size_t s = 0; s < N; ++s) {
        std::vector<double> level(pixels_, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            auto r = filtered(spectrum, resp.band_reconstruction(s, k), side_);
            simd::kernels().axpy(1.0, r.data(), level.data(), pixels_);
            band_recon_.push_back(Ops::center(std::move(r)));
        }
        level_recon_.push_back(Ops::center(std::move(level)));
    }
    level_recon_.push_back(Ops::center(filtered(spectrum, resp.lowpass_reconstruction(), side_)));
    for (std::size_t k = 0; k < K; ++k) oriented_low_.push_back(Ops::center(filtered(spectrum, resp.oriented_lowpass(k), side_)));
    high_ = Ops::center(filtered(spectrum, resp.highpass_reconstruction(), side_));

    // Complex band coefficients on their own grids, and their magnitudes.
    bands_.assign(N, {});
    for (std::size_t s = 0; s < N; ++s) {
        auto& lvl = bands_[s];
        lvl.side = side_ >> s;
        const double gain = static_cast<double>(lvl.side * lvl.side) / static_cast<double>(pixels_);
        for (std::size_t k = 0; k < K; ++k) {
            auto z = spectrum;
            simd::kernels().scale_complex(z.data(), resp.band_analysis(s, k).data(), z.size());
            auto c = fft::crop(z, side_, lvl.side);
            for (auto& v : c) v *= gain;
            fft::inverse(c, lvl.side);
            std::vector<double> mag(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) mag[i] = std::abs(c[i]);
            lvl.magnitude.push_back(Ops::center(std::move(mag)));
            lvl.coeffs.push_back(std::move(c));
        }
    }
    upsampled_.assign(N * K * N, {});
    for (std::size_t s = 1; s < N; ++s) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto& mag = bands_[s].magnitude[k];
            std::vector<double> raw(mag.dev.size());
            for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mag.dev[i] + mag.mean;
            for (std::size_t f = 0; f < s; ++f)
                upsampled_[(s * K + k) * N + f] = Ops::center(upsample(raw, bands_[s].side, bands_[f].side));
        }
    }

    stats_.assign(layout_.dim(), 0.0);
    double* out = stats_.data();

    // C1
    const auto [skew, kurt] = Ops::skew_kurt(image_);
    *out++ = image_.mean;
    *out++ = image_.var;
    *out++ = skew;
    *out++ = kurt;
    *out++ = px[argmin_];
    *out++ = px[argmax_];
    // C2
    for (const auto& lvl : level_recon_) {
        const auto [s3, s4] = Ops::skew_kurt(lvl);
        *out++ = s3;
        *out++ = s4;
    }
    // C3
    for (const auto& r : band_recon_) {
        Ops::autocorrelation(r, side_, M, out);
        out += M * M;
    }
    // C4
    for (const auto& lvl : level_recon_) {
        Ops::autocorrelation(lvl, side_, M, out);
        out += M * M;
    }
    // C5
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j) *out++ = Ops::correlation(bands_[s].magnitude[k], bands_[s].magnitude[j]);
    // C6
    for (std::size_t m = 0; m <= N; ++m)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j) *out++ = Ops::correlation(oriented(m, k), oriented(m, j));
    // C7
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m <= N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j) *out++ = Ops::correlation(oriented(n, k), oriented(m, j));
    // C8
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m < N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j) {
                    const std::size_t f = std::min(n, m);
                    *out++ = Ops::correlation(magnitude_at(n, k, f), magnitude_at(m, j, f));
                }
    // C9
    for (const auto& r : band_recon_) *out++ = r.mean;
    *out++ = level_recon_[N].mean;
    *out++ = high_.mean;
    // C10
    *out++ = high_.var;

    for (std::size_t i = 0; i < stats_.size(); ++i) {
        if (!std::isfinite(stats_[i])) {
            throw NumericError("non-finite texture statistic " + layout_.names()[i]);
        }
    }
    return stats_;
}

Image PssEvaluator::gradient(std::span<const double> upstream) const {
    using Ops = PssEvaluatorOps;
    if (stats_.empty()) throw UsageError("gradient() called before evaluate()");
    if (upstream.size() != layout_.dim()) throw UsageError("upstream gradient length does not match the layout");
    const std::size_t N = params_.scales, K = params_.orientations, M = params_.neighborhood;
    const auto& kern = simd::kernels();
    const auto& resp = *responses_;

    std::vector<double> g_img(pixels_, 0.0), g_high(pixels_, 0.0);
    std::vector<std::vector<double>> g_band(N * K, std::vector<double>(pixels_, 0.0));
    std::vector<std::vector<double>> g_level(N + 1, std::vector<double>(pixels_, 0.0));
    std::vector<std::vector<double>> g_olow(K, std::vector<double>(pixels_, 0.0));
    std::vector<std::vector<double>> g_mag(N * K);
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k) g_mag[s * K + k].assign(bands_[s].side * bands_[s].side, 0.0);
    std::vector<std::vector<double>> g_up(N * K * N);
    for (std::size_t s = 1; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t f = 0; f < s; ++f) g_up[(s * K + k) * N + f].assign(bands_[f].side * bands_[f].side, 0.0);

    auto g_oriented = [&](std::size_t level, std::size_t k) -> std::vector<double>& {
        return level == N ? g_olow[k] : g_band[level * K + k];
    };
    auto g_mag_at = [&](std::size_t scale, std::size_t k, std::size_t finer) -> std::vector<double>& {
        return finer == scale ? g_mag[scale * K + k] : g_up[(scale * K + k) * N + finer];
    };

    const double* w = upstream.data();
    const double* val = stats_.data();
    const double inv_p = 1.0 / static_cast<double>(pixels_);

    // C1
    for (auto& g : g_img) g += w[0] * inv_p;
    kern.axpy(2.0 * w[1] * inv_p, image_.dev.data(), g_img.data(), pixels_);
    Ops::skew_kurt_backward(image_, w[2], w[3], g_img);
    g_img[argmin_] += w[4];
    g_img[argmax_] += w[5];
    w += 6;
    val += 6;
    // C2
    for (std::size_t m = 0; m <= N; ++m) {
        Ops::skew_kurt_backward(level_recon_[m], w[0], w[1], g_level[m]);
        w += 2;
        val += 2;
    }
    // C3
    for (std::size_t i = 0; i < N * K; ++i) {
        Ops::autocorrelation_backward(band_recon_[i], side_, M, w, val, g_band[i]);
        w += M * M;
        val += M * M;
    }
    // C4
    for (std::size_t m = 0; m <= N; ++m) {
        Ops::autocorrelation_backward(level_recon_[m], side_, M, w, val, g_level[m]);
        w += M * M;
        val += M * M;
    }
    // C5
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j)
                Ops::correlation_backward(bands_[s].magnitude[k], bands_[s].magnitude[j], *w++, g_mag[s * K + k],
                                          g_mag[s * K + j]);
    // C6
    for (std::size_t m = 0; m <= N; ++m)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < K; ++j)
                Ops::correlation_backward(oriented(m, k), oriented(m, j), *w++, g_oriented(m, k), g_oriented(m, j));
    // C7
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m <= N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j)
                    Ops::correlation_backward(oriented(n, k), oriented(m, j), *w++, g_oriented(n, k),
                                              g_oriented(m, j));
    // C8
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m < N; ++m)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = 0; j < K; ++j) {
                    const std::size_t f = std::min(n, m);
                    Ops::correlation_backward(magnitude_at(n, k, f), magnitude_at(m, j, f), *w++, g_mag_at(n, k, f),
                                              g_mag_at(m, j, f));
                }
    // C9
    for (std::size_t i = 0; i < N * K; ++i) {
        const double c = *w++ * inv_p;
        for (auto& g : g_band[i]) g += c;
    }
    {
        const double c = *w++ * inv_p;
        for (auto& g : g_level[N]) g += c;
    }
    {
        const double c = *w++ * inv_p;
        for (auto& g : g_high) g += c;
    }
    // C10
    kern.axpy(2.0 * (*w++) * inv_p, high_.dev.data(), g_high.data(), pixels_);

    // Resampled magnitudes back to their native grids.
    for (std::size_t s = 1; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t f = 0; f < s; ++f) {
                const auto back = upsample_adjoint(g_up[(s * K + k) * N + f], bands_[s].side, bands_[f].side);
                kern.axpy(1.0, back.data(), g_mag[s * K + k].data(), back.size());
            }
    // Scale reconstructions are sums of their band reconstructions.
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k) kern.axpy(1.0, g_level[s].data(), g_band[s * K + k].data(), pixels_);

    // Pull everything back through the (self-adjoint) reconstruction responses
    // and the adjoint of the band analysis, in one spectrum.
    std::vector<cplx> acc(pixels_);
    auto pull = [&](const std::vector<double>& g, const std::vector<double>& t) {
        auto s = to_complex(g);
        fft::forward(s, side_);
        kern.accumulate_complex(s.data(), t.data(), acc.data(), acc.size());
    };
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t k = 0; k < K; ++k) pull(g_band[s * K + k], resp.band_reconstruction(s, k));
    pull(g_level[N], resp.lowpass_reconstruction());
    for (std::size_t k = 0; k < K; ++k) pull(g_olow[k], resp.oriented_lowpass(k));
    pull(g_high, resp.highpass_reconstruction());

    for (std::size_t s = 0; s < N; ++s) {
        const std::size_t n = bands_[s].side;
        for (std::size_t k = 0; k < K; ++k) {
            const auto& c = bands_[s].coeffs[k];
            const auto& gm = g_mag[s * K + k];
            std::vector<cplx> u(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) {
                const double a = std::abs(c[i]);
                u[i] = a > 0.0 ? c[i] * (gm[i] / a) : cplx{};
            }
            fft::forward(u, n);
            const auto padded = fft::pad(u, n, side_);
            kern.accumulate_complex(padded.data(), resp.band_analysis(s, k).data(), acc.data(), acc.size());
        }
    }
    fft::inverse(acc, side_);

    Image grad(side_, side_);
    auto gp = grad.pixels();
    for (std::size_t i = 0; i < pixels_; ++i) {
        gp[i] = g_img[i] + acc[i].real();
        if (!std::isfinite(gp[i])) throw NumericError("non-finite texture-statistic gradient");
    }
    return grad;
}

} // namespace texlat
