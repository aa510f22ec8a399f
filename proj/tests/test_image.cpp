#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

#include "support.hpp"
#include "texlat/error.hpp"
#include "texlat/image.hpp"

using namespace texlat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "texlat_test_image";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_file(const std::string& name, const std::string& bytes) {
    const auto p = scratch(name);
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
}

} // namespace

TEST_CASE("binary pgm bytes map directly") {
    const std::string raster{'\0', '\xff', '\x80', '\x40'};
    const auto img = load_image(write_file("a.pgm", "P5\n2 2\n255\n" + raster));
    CHECK(img == Image(2, 2, {0, 255, 128, 64}));
}

TEST_CASE("ascii pgm single pixel") {
    const auto img = load_image(write_file("b.pgm", "P2 1 1 255 200"));
    CHECK(img == Image(1, 1, {200}));
    const auto commented = load_image(write_file("c.pgm", "P2\n# note\n2 1\n255\n1 2\n"));
    CHECK(commented == Image(2, 1, {1, 2}));
}

TEST_CASE("sixteen-bit pgm is rescaled") {
    const std::string raster{'\xff', '\xff', '\0', '\0'};
    const auto img = load_image(write_file("d.pgm", "P5\n2 1\n65535\n" + raster));
    CHECK(img(0, 0) == doctest::Approx(255.0));
    CHECK(img(1, 0) == 0.0);
}

TEST_CASE("malformed files") {
    auto message = [](const fs::path& p) {
        try {
            load_image(p);
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(write_file("e.pgm", "P5\n2")).find("unsupported format") != std::string::npos);
    CHECK(message(write_file("f.pgm", "GIF89a")).find("unsupported format") != std::string::npos);
    CHECK(message(write_file("g.pgm", "P5\n0 4\n255\n")).find("zero-sized") != std::string::npos);
    CHECK(message(write_file("h.pgm", "P5\n4 4\n255\nabc")).find("truncated") != std::string::npos);
    CHECK_THROWS_AS(load_image(scratch("missing.pgm")), DataError);
}

TEST_CASE("save and load round trip") {
    Image img(7, 5);
    std::mt19937_64 rng(3);
    for (auto& v : img.pixels()) v = static_cast<double>(rng() % 256);
    const auto p = scratch("rt.pgm");
    save_pgm(img, p);
    const auto back = load_image(p);
    CHECK(back == img);
    save_pgm(back, p);
    CHECK(load_image(p) == img);

    save_pgm(Image(2, 1, {-4.0, 300.6}), p);
    CHECK(load_image(p) == Image(2, 1, {0, 255}));
}

TEST_CASE("normalize") {
    const auto out = normalize(Image(2, 1, {0, 2}), 127, 40);
    CHECK(out(0, 0) == doctest::Approx(87));
    CHECK(out(1, 0) == doctest::Approx(167));
    CHECK(normalize(Image(3, 3, 5.0), 127, 40) == Image(3, 3, 127.0));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto img = testing::random_image(16, seed, 50, 13);
        const auto a = normalize(img, 127, 40);
        CHECK(std::abs(mean(a.pixels()) - 127) < 1e-9);
        CHECK(std::abs(std::sqrt(variance(a.pixels())) - 40) < 1e-9);
        const auto b = normalize(a, 127, 40);
        CHECK(testing::max_abs_diff(a.pixels(), b.pixels()) < 1e-9);
    }
    CHECK_THROWS_AS(normalize(Image(2, 2), 0, 0), UsageError);
    CHECK_THROWS_AS(normalize(Image(2, 2), 0, -1), UsageError);
}

TEST_CASE("box resize") {
    CHECK(resize_box(Image(2, 2, {0, 2, 4, 6}), 1, 1) == Image(1, 1, {3}));
    Image board(4, 4);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) board(x, y) = (x + y) % 2 ? 255.0 : 0.0;
    CHECK(resize_box(board, 2, 2) == Image(2, 2, 127.5));
    CHECK_THROWS_AS(resize_box(Image(576, 576), 128, 128), UsageError);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto img = testing::random_image(24, seed, 100, 30);
        for (std::size_t side : {12u, 8u, 6u, 4u, 3u, 1u})
            CHECK(std::abs(mean(resize_box(img, side, side).pixels()) - mean(img.pixels())) < 1e-9);
    }
}

TEST_CASE("area resize") {
    const auto img = testing::random_image(18, 4, 100, 30);
    CHECK(resize_area(img, 6, 6) == resize_box(img, 6, 6));
    const auto small = resize_area(img, 4, 4);
    CHECK(small.width() == 4);
    CHECK(std::abs(mean(small.pixels()) - mean(img.pixels())) < 1e-9);
    // A 3 -> 2 resample: each output covers 1.5 source pixels.
    const auto two = resize_area(Image(3, 1, {0, 3, 6}), 2, 1);
    CHECK(two(0, 0) == doctest::Approx((0 + 0.5 * 3) / 1.5));
    CHECK(two(1, 0) == doctest::Approx((0.5 * 3 + 6) / 1.5));
    CHECK(resize_area(Image(5, 5, 9.0), 3, 3) == Image(3, 3, 9.0));
    const auto up = resize_area(Image(2, 1, {1, 3}), 4, 1);
    CHECK(up == Image(4, 1, {1, 1, 3, 3}));
}

TEST_CASE("circular shift") {
    const Image img(3, 2, {1, 2, 3, 4, 5, 6});
    const auto s = circular_shift(img, 1, 0);
    CHECK(s == Image(3, 2, {3, 1, 2, 6, 4, 5}));
    CHECK(circular_shift(img, -1, 1) == Image(3, 2, {5, 6, 4, 2, 3, 1}));
    CHECK(circular_shift(img, 3, 2) == img);
}

TEST_CASE("construction checks") {
    CHECK_THROWS_AS(Image(2, 2, std::vector<double>{1, 2, 3}), UsageError);
    CHECK(variance(std::vector<double>{1, 3}) == 1.0);
}
