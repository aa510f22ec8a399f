#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "texlat/image.hpp"

namespace texlat::testing {

inline Image random_image(std::size_t side, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    Image img(side, side);
    for (auto& v : img.pixels()) v = dist(rng);
    return img;
}

inline Image grating(std::size_t side, double cycles_x, double cycles_y, double amplitude = 1.0, double offset = 0.0) {
    Image img(side, side);
    const double two_pi = 2 * std::numbers::pi;
    for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x)
            img(x, y) = offset + amplitude * std::cos(two_pi * (cycles_x * x + cycles_y * y) / side);
    return img;
}

inline double l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double relative_l2(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace texlat::testing

namespace texlat::testing {

// White noise smoothed by a circular box blur, scaled to the given moments.
inline Image filtered_noise(std::size_t side, std::uint64_t seed, std::size_t radius, double mean = 127.0,
                            double sd = 40.0) {
    const Image white = random_image(side, seed);
    Image out(side, side);
    for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x) {
            double s = 0.0;
            for (std::size_t dy = 0; dy <= 2 * radius; ++dy)
                for (std::size_t dx = 0; dx <= 2 * radius; ++dx)
                    s += white((x + dx + side - radius) % side, (y + dy + side - radius) % side);
            out(x, y) = s;
        }
    return normalize(out, mean, sd);
}

// Grating plus a weaker blurred-noise component so no band is empty.
inline Image noisy_grating(std::size_t side, double cx, double cy, std::uint64_t seed) {
    Image g = grating(side, cx, cy, 1.0);
    const Image n = filtered_noise(side, seed, 1, 0.0, 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) g.pixels()[i] += n.pixels()[i];
    return normalize(g, 127.0, 40.0);
}

} // namespace texlat::testing
