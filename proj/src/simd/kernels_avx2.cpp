// Compiled with -mavx2 (no FMA) and only entered after a runtime CPU check.
#include <immintrin.h>

#include "texlat/simd/kernels.hpp"

namespace texlat::simd::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

PowerSums central_power_sums(const double* x, std::size_t n, double mean) {
    const __m256d vm = _mm256_set1_pd(mean);
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd(), a4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
        __m256d d2 = _mm256_mul_pd(d, d);
        a2 = _mm256_add_pd(a2, d2);
        a3 = _mm256_add_pd(a3, _mm256_mul_pd(d2, d));
        a4 = _mm256_add_pd(a4, _mm256_mul_pd(d2, d2));
    }
    PowerSums p{hsum(a2), hsum(a3), hsum(a4)};
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        p.s2 += d2;
        p.s3 += d2 * d;
        p.s4 += d2 * d2;
    }
    return p;
}

// Two complex values per register; t is duplicated to [t0, t0, t1, t1].
inline __m256d dup_pairs(const double* t) {
    __m256d v = _mm256_castpd128_pd256(_mm_loadu_pd(t));
    return _mm256_permute4x64_pd(v, 0x50);
}

void scale_complex(std::complex<double>* z, const double* t, std::size_t n) {
    auto* zd = reinterpret_cast<double*>(z);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d vz = _mm256_loadu_pd(zd + 2 * i);
        _mm256_storeu_pd(zd + 2 * i, _mm256_mul_pd(vz, dup_pairs(t + i)));
    }
    for (; i < n; ++i) z[i] = {z[i].real() * t[i], z[i].imag() * t[i]};
}

void accumulate_complex(const std::complex<double>* z, const double* t, std::complex<double>* acc,
                        std::size_t n) {
    const auto* zd = reinterpret_cast<const double*>(z);
    auto* ad = reinterpret_cast<double*>(acc);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(zd + 2 * i), dup_pairs(t + i));
        _mm256_storeu_pd(ad + 2 * i, _mm256_add_pd(_mm256_loadu_pd(ad + 2 * i), prod));
    }
    for (; i < n; ++i)
        acc[i] = {acc[i].real() + z[i].real() * t[i], acc[i].imag() + z[i].imag() * t[i]};
}

void window_dots(const double* src, std::size_t stride, const double* patch, std::size_t ph, std::size_t pw,
                 std::size_t count, double* out) {
    std::size_t x = 0;
    for (; x + 4 <= count; x += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t i = 0; i < ph; ++i) {
            const double* row = src + i * stride + x;
            const double* prow = patch + i * pw;
            for (std::size_t j = 0; j < pw; ++j)
                acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(row + j), _mm256_set1_pd(prow[j])));
        }
        _mm256_storeu_pd(out + x, acc);
    }
    for (; x < count; ++x) {
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
    std::size_t x = 0;
    for (; x + 4 <= count; x += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t i = 0; i < ph; ++i) {
            const double* row = src + i * stride + x;
            for (std::size_t j = 0; j < pw; ++j) {
                __m256d v = _mm256_loadu_pd(row + j);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
            }
        }
        _mm256_storeu_pd(out + x, acc);
    }
    for (; x < count; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ph; ++i) {
            const double* row = src + i * stride + x;
            for (std::size_t j = 0; j < pw; ++j) acc += row[j] * row[j];
        }
        out[x] = acc;
    }
}

} // namespace

const Kernels& avx2_kernels() {
    static const Kernels table{Isa::avx2,          "avx2",        dot,
                               sum,                axpy,          central_power_sums,
                               scale_complex,      accumulate_complex, window_dots,
                               window_sq_sums};
    return table;
}

} // namespace texlat::simd::detail
