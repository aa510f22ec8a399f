#include <doctest.h>

#include <random>

#include "support.hpp"
#include "texlat/error.hpp"
#include "texlat/tss.hpp"

using namespace texlat;

namespace {

// Exhaustive scan in the most direct form.
double brute_tss(const Image& s, const Image& src) {
    const std::size_t p = s.width();
    double ss = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) ss += s(j, i) * s(j, i);
    double best = -INFINITY;
    for (std::size_t y = 0; y + p <= src.height(); ++y)
        for (std::size_t x = 0; x + p <= src.width(); ++x) {
            double dot = 0.0, xx = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j) {
                    const double v = src(x + j, y + i);
                    dot += v * s(j, i);
                    xx += v * v;
                }
            const double denom = std::sqrt(xx) * std::sqrt(ss);
            best = std::max(best, denom > 0 ? dot / denom : 0.0);
        }
    return best;
}

Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t p) {
    Image out(p, p);
    for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x) out(x, y) = img(x0 + x, y0 + y);
    return out;
}

} // namespace

TEST_CASE("matches the brute-force oracle exactly") {
    std::mt19937_64 rng(1);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto src = testing::random_image(8, seed, seed % 2 ? 0.0 : 3.0);
        const auto sample = testing::random_image(3, seed + 1000, seed % 3 ? 0.0 : -1.0);
        const auto r = tss(sample, src, 3);
        CHECK(r.tss == brute_tss(sample, src));
        CHECK(r.candidates == 36);
        CHECK(std::abs(r.tss) <= 1 + 1e-12);
    }
}

TEST_CASE("negated patch of a zero-mean source") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto src = testing::random_image(8, seed);
        const double m = mean(src.pixels());
        for (auto& v : src.pixels()) v -= m;
        Image s = crop(src, 2, 3, 3);
        for (auto& v : s.pixels()) v = -v;
        CHECK(tss(s, src, 3).tss == brute_tss(s, src));
    }
}

TEST_CASE("self patches score one") {
    const auto src = testing::filtered_noise(40, 2, 1);
    for (std::size_t y : {0u, 7u, 21u})
        for (std::size_t x : {0u, 5u, 21u}) {
            const auto r = tss(crop(src, x, y, 19), src);
            CHECK(r.tss == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.patch == 19);
            CHECK(r.candidates == 22 * 22);
        }
    const auto r = tss(crop(src, 4, 9, 3), src, 3);
    CHECK(r.x == 4);
    CHECK(r.y == 9);
}

TEST_CASE("parallel constants") {
    CHECK(tss(Image(3, 3, 2.0), Image(8, 8, 5.0), 3).tss == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tss(Image(3, 3, 0.0), Image(8, 8, 5.0), 3).tss == 0.0);
    CHECK(tss(Image(3, 3, 1.0), Image(8, 8, 0.0), 3).tss == 0.0);
}

TEST_CASE("tss errors") {
    CHECK_THROWS_AS(tss(Image(4, 4), Image(3, 3), 4), UsageError);
    CHECK_THROWS_AS(tss(Image(3, 3), Image(8, 8), 4), UsageError);
    CHECK_THROWS_AS(tss(Image(0, 0), Image(8, 8), 0), UsageError);
}

TEST_CASE("grid tss") {
    const auto src = testing::filtered_noise(64, 8, 1);
    CHECK(grid_tss(src, src, 19) == doctest::Approx(1.0).epsilon(1e-12));
    const auto other = testing::filtered_noise(64, 9, 1);
    const double g = grid_tss(other, src, 19);
    CHECK(g < 1.0);
    CHECK(g > -1.0);
    CHECK_THROWS_AS(grid_tss(Image(10, 10), src, 19), UsageError);
}

TEST_CASE("evaluate_model rows") {
    std::vector<Image> images;
    std::vector<PssVector> feats;
    const PssParams p{2, 4, 5};
    for (std::uint64_t i = 0; i < 12; ++i) {
        images.push_back(testing::filtered_noise(32, i, 1 + i % 2));
        feats.push_back(extract_pss(images.back(), p));
    }
    const auto model = fit_hierarchy(feats, 0.999, 8);
    SynthesisConfig cfg;
    cfg.iterations = 5;
    const std::span<const Image> two(images.data(), 2);
    const auto rows = evaluate_model(model, two, cfg, 19, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.tss <= 1.0 + 1e-12);
        CHECK(r.tss >= -1.0);
        CHECK(r.trace.size() == 6);
        CHECK(r.pss_error >= 0.0);
    }
    const auto again = evaluate_model(model, two, cfg, 19, 2);
    CHECK(again[0].tss == rows[0].tss);
    CHECK(again[1].trace == rows[1].trace);
    CHECK_THROWS_AS(evaluate_model(model, std::span<const Image>{}, cfg), UsageError);
}
