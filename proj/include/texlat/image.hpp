#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace texlat {

/// Grayscale raster, row-major, double precision. Pixel values are nominally
/// in [0, 255] after loading but are unbounded internally.
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, double fill = 0.0);
    Image(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool is_square() const { return width_ == height_; }

    double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<double> pixels() { return data_; }
    std::span<const double> pixels() const { return data_; }
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

/// Reads a binary (P5) or ASCII (P2) PGM. 16-bit data is rescaled to [0, 255].
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM; values are rounded and clamped to [0, 255].
void save_pgm(const Image& img, const std::filesystem::path& path);

/// Affine map onto the given sample mean and population standard deviation.
/// A (numerically) constant input maps to a constant image at target_mean.
Image normalize(const Image& img, double target_mean, double target_std);

/// Integer box decimation; every output pixel is the mean of its source block.
/// Throws UsageError when the new size does not divide the old one.
Image resize_box(const Image& img, std::size_t new_w, std::size_t new_h);

/// Area-weighted resampling: each output pixel is the exact average of the
/// piecewise-constant input over its footprint. Reduces to resize_box when the
/// factors are integers.
Image resize_area(const Image& img, std::size_t new_w, std::size_t new_h);

/// Circular shift: out(x, y) = in(x - dx, y - dy) with wrap-around.
Image circular_shift(const Image& img, long dx, long dy);

double mean(std::span<const double> v);
/// Population variance (divides by n).
double variance(std::span<const double> v);

} // namespace texlat
