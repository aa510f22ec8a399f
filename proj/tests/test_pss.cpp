#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "texlat/error.hpp"
#include "texlat/pss.hpp"
#include "texlat/pss_evaluator.hpp"

using namespace texlat;
using namespace texlat::testing;

namespace {

std::vector<double> slice(const PssVector& v, std::size_t g) {
    const auto s = group_view(v, g);
    return {s.begin(), s.end()};
}

} // namespace

TEST_CASE("closed-form dimensions") {
    CHECK(pss_dim({4, 4, 7}) == 1784);
    // 6 + 4 + 9 + 18 + 1 + 2 + 2 + 1 + 3 + 1
    CHECK(pss_dim({1, 1, 3}) == 47);
    CHECK(pss_group_size({4, 4, 7}, 3) == 784);
    CHECK(pss_group_size({4, 4, 7}, 7) == 320);
    CHECK_THROWS_AS(pss_dim({4, 4, 6}), UsageError);
    CHECK_THROWS_AS(pss_dim({4, 4, 1}), UsageError);
}

TEST_CASE("layout names are unique and follow the group ranges") {
    const PssLayout layout({4, 4, 7});
    CHECK(layout.names().size() == 1784);
    const std::set<std::string> unique(layout.names().begin(), layout.names().end());
    CHECK(unique.size() == 1784);
    CHECK(std::find(layout.names().begin(), layout.names().end(), "C3.s2.o1.dy-3.dx2") != layout.names().end());
    for (std::size_t g = 1; g <= 10; ++g) {
        const auto& r = layout.group(g);
        CHECK(layout.names()[r.offset].rfind("C" + std::to_string(g) + ".", 0) == 0);
        CHECK(layout.names()[r.offset + r.size - 1].rfind("C" + std::to_string(g) + ".", 0) == 0);
    }
    CHECK(layout.names().back() == "C10.hi.var");
}

TEST_CASE("realized length matches the closed form for random parameters") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const PssParams p{1 + rng() % 3, 1 + rng() % 4, 3 + 2 * (rng() % 3)};
        const std::size_t side = std::size_t{4} << p.scales;
        const auto v = extract_pss(random_image(side, trial), p);
        CAPTURE(p.scales);
        CAPTURE(p.orientations);
        CAPTURE(p.neighborhood);
        CHECK(v.dim() == pss_dim(p));
    }
}

TEST_CASE("constant image gives the degenerate statistics") {
    const double c = 42.0;
    const auto v = extract_pss(Image(64, 64, c), {3, 4, 5});
    CHECK(slice(v, 1) == std::vector<double>{c, 0, 0, 0, c, c});
    for (std::size_t g : {2u, 3u, 4u, 5u, 6u, 7u, 8u})
        for (double x : group_view(v, g)) CHECK(x == 0.0);
    CHECK(group_view(v, 10)[0] == doctest::Approx(0.0));
    CHECK(std::abs(group_view(v, 10)[0]) < 1e-20);
}

TEST_CASE("white noise marginals") {
    const auto v = extract_pss(random_image(128, 77), {4, 4, 7});
    CHECK(v.dim() == 1784);
    const auto c1 = slice(v, 1);
    CHECK(std::abs(c1[1] - 1.0) <= 0.05);
    CHECK(std::abs(c1[2]) <= 0.1);
    CHECK(std::abs(c1[3] - 3.0) <= 0.3);
}

TEST_CASE("zero-lag autocorrelation entries are one") {
    const PssParams p{3, 4, 5};
    const auto v = extract_pss(random_image(64, 8), p);
    const std::size_t mm = 25;
    for (std::size_t g : {3u, 4u}) {
        const auto s = group_view(v, g);
        for (std::size_t b = 0; b < s.size() / mm; ++b) CHECK(s[b * mm + mm / 2] == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : s) CHECK(std::abs(x) <= 1.0 + 1e-12);
    }
}

TEST_CASE("statistics are invariant to circular shifts") {
    const PssParams p{3, 4, 5};
    const auto img = random_image(64, 9);
    const auto v = extract_pss(img, p);

    // Any shift leaves every full-resolution aggregate unchanged.
    const auto w = extract_pss(circular_shift(img, 3, -7), p);
    const auto c1v = slice(v, 1), c1w = slice(w, 1);
    CHECK(c1v[4] == c1w[4]);
    CHECK(c1v[5] == c1w[5]);
    CHECK(max_abs_diff(c1v, c1w) <= 1e-12);
    for (std::size_t g : {2u, 3u, 4u, 6u, 7u, 9u, 10u})
        CHECK(max_abs_diff(group_view(v, g), group_view(w, g)) <= 1e-6);

    // Magnitude groups live on decimated grids; shifts commensurate with the
    // coarsest band grid keep them invariant as well.
    const auto u = extract_pss(circular_shift(img, 8, 16), p);
    for (std::size_t g = 2; g <= 10; ++g) CHECK(max_abs_diff(group_view(v, g), group_view(u, g)) <= 1e-6);
}

TEST_CASE("pixel marginals are affinely covariant") {
    const PssParams p{2, 2, 3};
    const auto img = random_image(32, 10, 5.0, 2.0);
    Image mapped = img;
    const double a = 3.0, b = -7.0;
    for (auto& x : mapped.pixels()) x = a * x + b;
    const auto c = slice(extract_pss(img, p), 1);
    const auto d = slice(extract_pss(mapped, p), 1);
    CHECK(d[0] == doctest::Approx(a * c[0] + b).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(a * a * c[1]).epsilon(1e-12));
    CHECK(std::abs(d[2] - c[2]) <= 1e-9);
    CHECK(std::abs(d[3] - c[3]) <= 1e-9);
    CHECK(d[4] == doctest::Approx(a * c[4] + b).epsilon(1e-12));
    CHECK(d[5] == doctest::Approx(a * c[5] + b).epsilon(1e-12));
}

TEST_CASE("extraction is deterministic") {
    const auto img = random_image(64, 12);
    CHECK(extract_pss(img, {3, 4, 7}).values == extract_pss(img, {3, 4, 7}).values);
}

TEST_CASE("group views partition the vector") {
    const auto v = extract_pss(random_image(64, 13), {3, 4, 7});
    CHECK(group_view(v, 1).size() == 6);
    std::vector<double> joined;
    for (std::size_t g = 1; g <= 10; ++g) {
        const auto s = group_view(v, g);
        joined.insert(joined.end(), s.begin(), s.end());
    }
    CHECK(joined == v.values);
    CHECK_THROWS_AS(group_view(v, 11), UsageError);
    CHECK_THROWS_AS(group_view(v, 0), UsageError);
}

TEST_CASE("extraction input validation") {
    CHECK_THROWS_AS(extract_pss(random_image(48, 1), {2, 4, 3}), UsageError);
    CHECK_THROWS_AS(extract_pss(Image(32, 16), {2, 4, 3}), UsageError);
    CHECK_THROWS_AS(extract_pss(random_image(16, 1), {3, 4, 3}), UsageError);
}

TEST_CASE("evaluator gradient matches central finite differences") {
    struct Case {
        std::size_t side;
        PssParams params;
    };
    for (const auto& tc : {Case{16, {2, 2, 3}}, Case{32, {3, 4, 5}}}) {
        PssEvaluator eval(tc.side, tc.params);
        const auto img = random_image(tc.side, 14, 0.0, 1.0);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> nd;
        std::vector<double> upstream(eval.layout().dim());
        for (auto& u : upstream) u = nd(rng);

        eval.evaluate(img);
        const auto analytic = eval.gradient(upstream);

        const double eps = 1e-5;
        std::vector<double> numeric(img.size());
        for (std::size_t i = 0; i < img.size(); ++i) {
            Image plus = img, minus = img;
            plus.pixels()[i] += eps;
            minus.pixels()[i] -= eps;
            const auto& fp = eval.evaluate(plus);
            double a = 0.0;
            for (std::size_t j = 0; j < fp.size(); ++j) a += upstream[j] * fp[j];
            const auto& fm = eval.evaluate(minus);
            double b = 0.0;
            for (std::size_t j = 0; j < fm.size(); ++j) b += upstream[j] * fm[j];
            numeric[i] = (a - b) / (2 * eps);
        }
        double scale = 0.0;
        for (double x : numeric) scale = std::max(scale, std::abs(x));
        const double err = max_abs_diff(analytic.pixels(), numeric) / scale;
        CAPTURE(tc.side);
        CHECK(err <= 1e-5);
    }
}
