#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "texlat/error.hpp"
#include "texlat/fft.hpp"
#include "texlat/pyramid.hpp"

using namespace texlat;
using namespace texlat::testing;
using std::numbers::pi;

namespace {

// Zeroes all frequencies with |bin| >= side/4 on either axis.
Image band_limit(const Image& img) {
    const std::size_t n = img.width();
    std::vector<std::complex<double>> s(img.pixels().begin(), img.pixels().end());
    fft::forward(s, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(fft::signed_bin(i, n)) >= long(n / 4) || std::abs(fft::signed_bin(j, n)) >= long(n / 4))
                s[i * n + j] = 0.0;
    fft::inverse(s, n);
    Image out(n, n);
    for (std::size_t i = 0; i < s.size(); ++i) out.pixels()[i] = s[i].real();
    return out;
}

Image rot90(const Image& img) {
    const std::size_t n = img.width();
    Image out(n, n);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) out(x, y) = img(y, n - 1 - x);
    return out;
}

double band_energy(const ComplexGrid& g) {
    double e = 0.0;
    for (auto v : g.values) e += std::norm(v);
    return e;
}

} // namespace

TEST_CASE("radial low-pass matches its piecewise definition") {
    CHECK(filters::radial_lowpass(pi / 4) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(filters::radial_lowpass(pi / 2) == 0.0);
    CHECK(filters::radial_lowpass(pi / (2 * std::sqrt(2.0))) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(filters::radial_lowpass(0.0) == 2.0);
    CHECK(filters::radial_lowpass(3.0) == 0.0);
}

TEST_CASE("radial high-pass is continuous and complementary") {
    CHECK(std::abs(filters::radial_highpass(pi / 4)) < 1e-15);
    CHECK(filters::radial_highpass(pi / 2) == 1.0);
    CHECK(std::abs(filters::radial_highpass(pi / 4 + 1e-12)) < 1e-9);
    CHECK(filters::radial_highpass(pi / 2 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));

    double worst = 0.0;
    const int samples = 10000;
    for (int i = 0; i <= samples; ++i) {
        const double r = pi * std::sqrt(2.0) * i / samples;
        const double l = filters::radial_lowpass(r), h = filters::radial_highpass(r);
        CHECK(l >= 0.0);
        CHECK(l <= 2.0);
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
        worst = std::max(worst, std::abs(h * h + (l / 2) * (l / 2) - 1.0));
        const double l0 = filters::initial_lowpass(r), h0 = filters::initial_highpass(r);
        worst = std::max(worst, std::abs(h0 * h0 + l0 * l0 - 1.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("angular normalization") {
    CHECK(filters::angular_gain(4) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(filters::angular_gain(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(filters::angular(0, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(filters::angular(k, 4, pi * k / 4) == doctest::Approx(filters::angular_gain(4)).epsilon(1e-14));
    CHECK(filters::angular(0, 4, pi) == 0.0);
}

TEST_CASE("angular windows tile the circle under Hermitian pairing") {
    for (std::size_t K : {1u, 2u, 4u, 6u}) {
        double worst = 0.0;
        const int samples = 10000;
        for (int i = 0; i < samples; ++i) {
            const double t = -pi + 2 * pi * i / samples;
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double a = filters::angular(k, K, t), b = filters::angular(k, K, t + pi);
                s += a * a + b * b;
            }
            worst = std::max(worst, std::abs(s - 1.0));
        }
        CAPTURE(K);
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("build follows the halving schedule") {
    const auto img = random_image(64, 1);
    const auto pyr = build_pyramid(img, {3, 4});
    CHECK(pyr.band(0, 0).side == 64);
    CHECK(pyr.band(1, 3).side == 32);
    CHECK(pyr.band(2, 2).side == 16);
    CHECK(pyr.lowpass.width() == 8);
    CHECK(pyr.highpass.width() == 64);
    CHECK(pyr.bands.size() == 12);
}

TEST_CASE("constant image routes to the low-pass residual only") {
    const Image img(64, 64, 3.5);
    const auto pyr = build_pyramid(img, {3, 4});
    double worst = 0.0;
    for (const auto& b : pyr.bands)
        for (auto v : b.values) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-10);
    CHECK(mean(pyr.lowpass.pixels()) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(max_abs_diff(collapse(pyr).pixels(), img.pixels()) <= 1e-9);
}

TEST_CASE("impulse response recovers the composite band filters") {
    const std::size_t n = 32;
    Image img(n, n);
    img(n / 2, n / 2) = 1.0;
    const PyramidParams params{2, 4};
    const auto pyr = build_pyramid(img, params);
    const PyramidResponses resp(n, params);

    std::vector<std::complex<double>> spectrum(img.pixels().begin(), img.pixels().end());
    fft::forward(spectrum, n);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t k = 0; k < 4; ++k) {
            auto filtered = spectrum;
            const auto& a = resp.band_analysis(s, k);
            for (std::size_t i = 0; i < filtered.size(); ++i) filtered[i] *= a[i];
            const std::size_t m = n >> s;
            auto cropped = fft::crop(filtered, n, m);
            const double gain = double(m * m) / double(n * n);
            for (auto& v : cropped) v *= gain;
            fft::inverse(cropped, m);
            double worst = 0.0;
            for (std::size_t i = 0; i < cropped.size(); ++i)
                worst = std::max(worst, std::abs(cropped[i] - pyr.band(s, k).values[i]));
            CHECK(worst <= 1e-13);
        }
    }
}

TEST_CASE("perfect reconstruction on random images") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto img = random_image(128, 100 + seed, 10.0, 3.0);
        const auto pyr = build_pyramid(img, {4, 4});
        CHECK(relative_l2(collapse(pyr).pixels(), img.pixels()) <= 1e-8);
    }
    for (std::size_t K : {1u, 2u, 3u, 6u}) {
        const auto img = random_image(32, 7 + K);
        CHECK(relative_l2(collapse(build_pyramid(img, {2, K})).pixels(), img.pixels()) <= 1e-8);
    }
}

TEST_CASE("collapse is linear") {
    const auto p1 = build_pyramid(random_image(32, 3), {2, 4});
    const auto p2 = build_pyramid(random_image(32, 4), {2, 4});
    const double a = 0.7, b = -1.3;
    const auto lhs = collapse(combine(a, p1, b, p2));
    const auto c1 = collapse(p1), c2 = collapse(p2);
    std::vector<double> rhs(lhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * c1.pixels()[i] + b * c2.pixels()[i];
    CHECK(max_abs_diff(lhs.pixels(), rhs) <= 1e-10);
}

TEST_CASE("component reconstructions sum to the image and match the composite responses") {
    const std::size_t n = 64;
    const PyramidParams params{3, 4};
    const auto img = random_image(n, 11);
    const auto pyr = build_pyramid(img, params);
    const auto resp = PyramidResponses::get(n, params);

    std::vector<std::complex<double>> spectrum(img.pixels().begin(), img.pixels().end());
    fft::forward(spectrum, n);
    auto via_response = [&](const std::vector<double>& t) {
        auto s = spectrum;
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= t[i];
        fft::inverse(s, n);
        std::vector<double> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i].real();
        return out;
    };

    std::vector<double> total(n * n, 0.0);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto r = reconstruct_band(pyr, s, k);
            CHECK(max_abs_diff(r.pixels(), via_response(resp->band_reconstruction(s, k))) <= 1e-12);
            for (std::size_t i = 0; i < total.size(); ++i) total[i] += r.pixels()[i];
        }
    }
    const auto lo = reconstruct_lowpass(pyr), hi = reconstruct_highpass(pyr);
    CHECK(max_abs_diff(lo.pixels(), via_response(resp->lowpass_reconstruction())) <= 1e-12);
    CHECK(max_abs_diff(hi.pixels(), via_response(resp->highpass_reconstruction())) <= 1e-12);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += lo.pixels()[i] + hi.pixels()[i];
    CHECK(relative_l2(total, img.pixels()) <= 1e-8);

    // Oriented low-pass images partition the low-pass reconstruction.
    std::vector<double> split(n * n, 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto part = via_response(resp->oriented_lowpass(k));
        for (std::size_t i = 0; i < split.size(); ++i) split[i] += part[i];
    }
    CHECK(max_abs_diff(split, lo.pixels()) <= 1e-12);
}

TEST_CASE("zeroed band reconstructs to zero") {
    auto pyr = build_pyramid(random_image(32, 5), {2, 4});
    std::fill(pyr.band(1, 2).values.begin(), pyr.band(1, 2).values.end(), std::complex<double>{});
    const auto r = reconstruct_band(pyr, 1, 2);
    CHECK(l2(r.pixels()) == 0.0);
}

TEST_CASE("single band passes an in-band sinusoid unchanged") {
    // With K = 2 the orientation-0 window is exactly 1 on the horizontal axis, and the
    // radial response is 1 at r = pi/2 on scale 0 and at r = pi/4 on scale 1.
    const std::size_t n = 64;
    const PyramidParams params{3, 2};
    for (std::size_t s = 0; s < 2; ++s) {
        const double cycles = double(n) / (4 << s);  // r = 2*pi*cycles/n
        const auto img = grating(n, cycles, 0.0);
        const auto pyr = build_pyramid(img, params);
        const auto r = reconstruct_band(pyr, s, 0);
        CAPTURE(s);
        CHECK(relative_l2(r.pixels(), img.pixels()) <= 1e-6);
    }
}

TEST_CASE("band magnitudes shift with the input") {
    const std::size_t n = 64;
    const auto img = random_image(n, 21);
    const auto shifted = circular_shift(img, 5, -3);
    const auto p = build_pyramid(img, {3, 4});
    const auto q = build_pyramid(shifted, {3, 4});
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& a = p.band(0, k).values;
        const auto& b = q.band(0, k).values;
        for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
                const std::size_t sx = (x + 5) % n, sy = (y + n - 3) % n;
                worst = std::max(worst, std::abs(std::abs(a[y * n + x]) - std::abs(b[sy * n + sx])));
            }
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("quarter-turn rotation permutes band energies across orientations") {
    const std::size_t n = 64;
    const auto img = band_limit(random_image(n, 31));
    const auto rotated = rot90(img);
    for (std::size_t K : {2u, 4u}) {
        const auto p = build_pyramid(img, {3, K});
        const auto q = build_pyramid(rotated, {3, K});
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t k = 0; k < K; ++k) {
                const double e = band_energy(p.band(s, k));
                const double f = band_energy(q.band(s, (k + K / 2) % K));
                CAPTURE(K);
                CAPTURE(s);
                CHECK(std::abs(e - f) <= 0.02 * e);
            }
        }
    }
}

TEST_CASE("pyramid input validation") {
    CHECK_THROWS_AS(build_pyramid(random_image(48, 1), {2, 4}), UsageError);
    CHECK_THROWS_AS(build_pyramid(random_image(32, 1), {4, 4}), UsageError);
    CHECK_THROWS_AS(build_pyramid(Image(32, 16), {1, 4}), UsageError);
    CHECK_THROWS_AS(build_pyramid(random_image(32, 1), {0, 4}), UsageError);
    auto pyr = build_pyramid(random_image(32, 1), {2, 2});
    CHECK_THROWS_AS(reconstruct_band(pyr, 2, 0), UsageError);
    CHECK_THROWS_AS(reconstruct_band(pyr, 0, 2), UsageError);
    pyr.band(1, 1).values.pop_back();
    CHECK_THROWS_AS(collapse(pyr), DataError);
}
