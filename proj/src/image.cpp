#include "texlat/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "texlat/error.hpp"

namespace texlat {

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

Image::Image(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
        throw UsageError("image data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(width_) + "x" + std::to_string(height_));
    }
}

namespace {

// Minimal cursor over the raw file bytes that understands PGM header syntax.
class PgmReader {
public:
    explicit PgmReader(std::string bytes) : bytes_(std::move(bytes)) {}

    // Next whitespace-delimited header token, skipping '#' comments.
    bool token(std::string& out) {
        out.clear();
        while (pos_ < bytes_.size()) {
            char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            out.push_back(bytes_[pos_++]);
        }
        return !out.empty();
    }

    bool number(long& out) {
        std::string t;
        if (!token(t)) return false;
        char* end = nullptr;
        out = std::strtol(t.c_str(), &end, 10);
        return end && *end == '\0';
    }

    // Skips the single whitespace byte separating the header from raster data.
    void skip_separator() {
        if (pos_ < bytes_.size()) ++pos_;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }
    unsigned char byte(std::size_t offset) const {
        return static_cast<unsigned char>(bytes_[pos_ + offset]);
    }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

} // namespace

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    PgmReader rd(std::move(bytes));
    std::string magic;
    long w = 0, h = 0, maxval = 0;
    if (!rd.token(magic) || (magic != "P2" && magic != "P5") || !rd.number(w) || !rd.number(h) ||
        !rd.number(maxval)) {
        throw DataError("unsupported format: " + path.string() + " is not a valid PGM");
    }
    if (w <= 0 || h <= 0) throw DataError("zero-sized image: " + path.string());
    if (maxval <= 0 || maxval > 65535) throw DataError("unsupported format: bad maxval in " + path.string());

    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const double scale = 255.0 / static_cast<double>(maxval);
    std::vector<double> data(n);

    if (magic == "P5") {
        rd.skip_separator();
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        if (rd.remaining() < n * bpp) throw DataError("truncated raster in " + path.string());
        for (std::size_t i = 0; i < n; ++i) {
            unsigned v = bpp == 1 ? rd.byte(i) : (unsigned(rd.byte(2 * i)) << 8) | rd.byte(2 * i + 1);
            data[i] = maxval == 255 ? static_cast<double>(v) : v * scale;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            long v = 0;
            if (!rd.number(v) || v < 0 || v > maxval) {
                throw DataError("truncated or invalid ASCII raster in " + path.string());
            }
            data[i] = maxval == 255 ? static_cast<double>(v) : v * scale;
        }
    }
    return Image(static_cast<std::size_t>(w), static_cast<std::size_t>(h), std::move(data));
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
    if (img.empty()) throw UsageError("cannot save an empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::string raster(img.size(), '\0');
    for (std::size_t i = 0; i < img.size(); ++i) {
        double v = std::clamp(std::round(img.pixels()[i]), 0.0, 255.0);
        raster[i] = static_cast<char>(static_cast<unsigned char>(v));
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
}

Image normalize(const Image& img, double target_mean, double target_std) {
    if (!(target_std > 0.0) || !std::isfinite(target_std)) {
        throw UsageError("normalize: target_std must be positive");
    }
    const double mu = mean(img.pixels());
    const double sd = std::sqrt(variance(img.pixels()));
    std::vector<double> out(img.size(), target_mean);
    if (sd >= 1e-12) {
        const double gain = target_std / sd;
        for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img.pixels()[i] - mu) * gain + target_mean;
    }
    return Image(img.width(), img.height(), std::move(out));
}

Image resize_box(const Image& img, std::size_t new_w, std::size_t new_h) {
    if (new_w == 0 || new_h == 0 || img.width() % new_w != 0 || img.height() % new_h != 0) {
        throw UsageError("resize_box: " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                         " is not divisible into " + std::to_string(new_w) + "x" + std::to_string(new_h));
    }
    const std::size_t fx = img.width() / new_w, fy = img.height() / new_h;
    Image out(new_w, new_h);
    const double inv = 1.0 / static_cast<double>(fx * fy);
    for (std::size_t y = 0; y < new_h; ++y) {
        for (std::size_t x = 0; x < new_w; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < fy; ++j)
                for (std::size_t i = 0; i < fx; ++i) s += img(x * fx + i, y * fy + j);
            out(x, y) = s * inv;
        }
    }
    return out;
}

namespace {

struct Tap {
    std::size_t index;
    double weight;
};

// Overlap of output cell [o*step, (o+1)*step) with each input cell, normalized.
std::vector<std::vector<Tap>> area_taps(std::size_t src, std::size_t dst) {
    std::vector<std::vector<Tap>> taps(dst);
    const double step = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t o = 0; o < dst; ++o) {
        const double lo = o * step, hi = (o + 1) * step;
        auto first = static_cast<std::size_t>(std::floor(lo));
        double total = 0.0;
        for (std::size_t i = first; i < src && static_cast<double>(i) < hi; ++i) {
            double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
            if (w > 0.0) {
                taps[o].push_back({i, w});
                total += w;
            }
        }
        for (auto& t : taps[o]) t.weight /= total;
    }
    return taps;
}

} // namespace

Image resize_area(const Image& img, std::size_t new_w, std::size_t new_h) {
    if (new_w == 0 || new_h == 0) throw UsageError("resize_area: zero target size");
    if (img.empty()) throw UsageError("resize_area: empty image");
    if (img.width() % new_w == 0 && img.height() % new_h == 0) return resize_box(img, new_w, new_h);

    const auto tx = area_taps(img.width(), new_w);
    const auto ty = area_taps(img.height(), new_h);
    Image out(new_w, new_h);
    for (std::size_t y = 0; y < new_h; ++y) {
        for (std::size_t x = 0; x < new_w; ++x) {
            double s = 0.0;
            for (const auto& a : ty[y])
                for (const auto& b : tx[x]) s += a.weight * b.weight * img(b.index, a.index);
            out(x, y) = s;
        }
    }
    return out;
}

Image circular_shift(const Image& img, long dx, long dy) {
    const auto w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
    Image out(img.width(), img.height());
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            long sx = ((x - dx) % w + w) % w;
            long sy = ((y - dy) % h + h) % h;
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
                img(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
        }
    }
    return out;
}

} // namespace texlat
