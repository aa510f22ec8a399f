#include "texlat/simd/kernels.hpp"

namespace texlat::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

PowerSums central_power_sums(const double* x, std::size_t n, double mean) {
    PowerSums p;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        p.s2 += d2;
        p.s3 += d2 * d;
        p.s4 += d2 * d2;
    }
    return p;
}

void scale_complex(std::complex<double>* z, const double* t, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = {z[i].real() * t[i], z[i].imag() * t[i]};
}

void accumulate_complex(const std::complex<double>* z, const double* t, std::complex<double>* acc,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        acc[i] = {acc[i].real() + z[i].real() * t[i], acc[i].imag() + z[i].imag() * t[i]};
}

void window_dots(const double* src, std::size_t stride, const double* patch, std::size_t ph, std::size_t pw,
                 std::size_t count, double* out) {
    for (std::size_t x = 0; x < count; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ph; ++i) {
            const double* row = src + i * stride + x;
            const double* prow = patch + i * pw;
            for (std::size_t j = 0; j < pw; ++j) acc += row[j] * prow[j];
        }
        out[x] = acc;
    }
}

void window_sq_sums(const double* src, std::size_t stride, std::size_t ph, std::size_t pw, std::size_t count,
                    double* out) {
    for (std::size_t x = 0; x < count; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ph; ++i) {
            const double* row = src + i * stride + x;
            for (std::size_t j = 0; j < pw; ++j) acc += row[j] * row[j];
        }
        out[x] = acc;
    }
}

} // namespace

const Kernels& scalar_kernels() {
    static const Kernels table{Isa::scalar,        "scalar",      dot,
                               sum,                axpy,          central_power_sums,
                               scale_complex,      accumulate_complex, window_dots,
                               window_sq_sums};
    return table;
}

} // namespace texlat::simd::detail
