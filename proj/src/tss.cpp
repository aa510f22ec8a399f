#include "texlat/tss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "texlat/error.hpp"
#include "texlat/simd/kernels.hpp"

namespace texlat {

TssReport tss(const Image& sample, const Image& source, std::size_t patch) {
    if (patch == 0) throw UsageError("TSS patch size must be positive");
    if (sample.width() != patch || sample.height() != patch) {
        throw UsageError("TSS sample is " + std::to_string(sample.width()) + "x" + std::to_string(sample.height()) +
                         ", expected " + std::to_string(patch) + "x" + std::to_string(patch));
    }
    if (source.width() < patch || source.height() < patch) throw UsageError("TSS source is smaller than the patch");

    const auto& k = simd::kernels();
    const double* s = sample.data().data();
    double ss = 0.0;
    k.window_sq_sums(s, patch, patch, patch, 1, &ss);
    const double snorm = std::sqrt(ss);
    const std::size_t cols = source.width() - patch + 1, rows = source.height() - patch + 1;

    TssReport report;
    report.patch = patch;
    report.candidates = rows * cols;
    report.tss = -INFINITY;
    std::vector<double> dots(cols), sq(cols);
    for (std::size_t y = 0; y < rows; ++y) {
        const double* row = source.data().data() + y * source.width();
        k.window_dots(row, source.width(), s, patch, patch, cols, dots.data());
        k.window_sq_sums(row, source.width(), patch, patch, cols, sq.data());
        for (std::size_t x = 0; x < cols; ++x) {
            const double denom = std::sqrt(sq[x]) * snorm;
            const double sim = denom > 0 ? dots[x] / denom : 0.0;
            if (sim > report.tss) {
                report.tss = sim;
                report.x = x;
                report.y = y;
            }
        }
    }
    return report;
}

double grid_tss(const Image& image, const Image& source, std::size_t patch) {
    if (patch == 0) throw UsageError("TSS patch size must be positive");
    const std::size_t nx = image.width() / patch, ny = image.height() / patch;
    if (nx == 0 || ny == 0) throw UsageError("image is smaller than one TSS sample");
    const std::size_t ox = (image.width() - nx * patch) / 2, oy = (image.height() - ny * patch) / 2;
    double total = 0.0;
    Image sample(patch, patch);
    for (std::size_t gy = 0; gy < ny; ++gy)
        for (std::size_t gx = 0; gx < nx; ++gx) {
            for (std::size_t y = 0; y < patch; ++y)
                for (std::size_t x = 0; x < patch; ++x) sample(x, y) = image(ox + gx * patch + x, oy + gy * patch + y);
            total += tss(sample, source, patch).tss;
        }
    return total / static_cast<double>(nx * ny);
}

std::vector<EvalRow> evaluate_model(const HppcaModel& model, std::span<const Image> images, const SynthesisConfig& cfg,
                                    std::size_t patch, std::size_t jobs) {
    if (images.empty()) throw UsageError("no images to evaluate");
    std::vector<EvalRow> rows(images.size());
    std::vector<std::exception_ptr> failures(images.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < images.size();) {
            try {
                const Image& img = images[i];
                const PssVector v = extract_pss(img, model.params());
                const PssVector decoded = model.decode(model.encode(v));
                double num = 0.0, den = 0.0;
                for (std::size_t j = 0; j < v.dim(); ++j) {
                    num += (decoded.values[j] - v.values[j]) * (decoded.values[j] - v.values[j]);
                    den += v.values[j] * v.values[j];
                }
                SynthesisConfig local = cfg;
                local.size = img.width();
                local.seed = cfg.seed + i;
                auto result = synthesize(decoded, local);
                rows[i].pss_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
                rows[i].tss = grid_tss(result.image, img, patch);
                rows[i].trace = std::move(result.trace);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, images.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return rows;
}

} // namespace texlat
