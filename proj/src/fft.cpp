#include "texlat/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "texlat/error.hpp"

namespace texlat::fft {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * n));
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!plan) throw NumericError("FFTW failed to plan a " + std::to_string(n) + "x" + std::to_string(n) + " DFT");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(std::span<cplx> grid, std::size_t n, int sign) {
    if (grid.size() != n * n) throw UsageError("fft: grid size does not match n*n");
    auto* p = reinterpret_cast<fftw_complex*>(grid.data());
    fftw_execute_dft(cache().get(n, sign), p, p);
}

} // namespace

void forward(std::span<cplx> grid, std::size_t n) { run(grid, n, FFTW_FORWARD); }

void inverse(std::span<cplx> grid, std::size_t n) {
    run(grid, n, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(n * n);
    for (auto& v : grid) v *= s;
}

std::vector<cplx> crop(std::span<const cplx> spectrum, std::size_t n, std::size_t m) {
    if (m > n || spectrum.size() != n * n) throw UsageError("fft::crop: bad sizes");
    std::vector<cplx> out(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        const long fi = signed_bin(i, m);
        const std::size_t si = static_cast<std::size_t>(fi < 0 ? fi + static_cast<long>(n) : fi);
        for (std::size_t j = 0; j < m; ++j) {
            const long fj = signed_bin(j, m);
            const std::size_t sj = static_cast<std::size_t>(fj < 0 ? fj + static_cast<long>(n) : fj);
            out[i * m + j] = spectrum[si * n + sj];
        }
    }
    return out;
}

std::vector<cplx> pad(std::span<const cplx> spectrum, std::size_t m, std::size_t n) {
    if (m > n || spectrum.size() != m * m) throw UsageError("fft::pad: bad sizes");
    std::vector<cplx> out(n * n);
    for (std::size_t i = 0; i < m; ++i) {
        const long fi = signed_bin(i, m);
        const std::size_t si = static_cast<std::size_t>(fi < 0 ? fi + static_cast<long>(n) : fi);
        for (std::size_t j = 0; j < m; ++j) {
            const long fj = signed_bin(j, m);
            const std::size_t sj = static_cast<std::size_t>(fj < 0 ? fj + static_cast<long>(n) : fj);
            out[si * n + sj] = spectrum[i * m + j];
        }
    }
    return out;
}

} // namespace texlat::fft
