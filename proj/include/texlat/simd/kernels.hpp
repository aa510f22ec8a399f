#pragma once

// Data-parallel inner loops used by the statistics, gradient and similarity code.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 variant. The active table is chosen once at runtime
// from CPU features; TEXLAT_SIMD=scalar forces the reference path.
//
// Element-wise kernels and the window_* kernels are lane-parallel over
// independent outputs and keep the scalar accumulation order, so they are
// bit-identical across variants. Reductions (dot, sum, power sums) use
// several accumulators in the vector variants and agree to rounding only.

#include <complex>
#include <cstddef>
#include <vector>

namespace texlat::simd {

enum class Isa { scalar, avx2 };

struct PowerSums {
    double s2 = 0.0;
    double s3 = 0.0;
    double s4 = 0.0;
};

struct Kernels {
    Isa isa;
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Sums of (x - mean)^2, ^3, ^4.
    PowerSums (*central_power_sums)(const double* x, std::size_t n, double mean);
    // z[i] *= t[i]
    void (*scale_complex)(std::complex<double>* z, const double* t, std::size_t n);
    // acc[i] += z[i] * t[i]
    void (*accumulate_complex)(const std::complex<double>* z, const double* t, std::complex<double>* acc,
                               std::size_t n);
    // out[x] = sum_{i<ph, j<pw} src[i*stride + x + j] * patch[i*pw + j], for x < count.
    void (*window_dots)(const double* src, std::size_t stride, const double* patch, std::size_t ph,
                        std::size_t pw, std::size_t count, double* out);
    // out[x] = sum_{i<ph, j<pw} src[i*stride + x + j]^2, for x < count.
    void (*window_sq_sums)(const double* src, std::size_t stride, std::size_t ph, std::size_t pw,
                           std::size_t count, double* out);
};

/// Kernel table selected for this process.
const Kernels& kernels();

/// A specific variant; throws UsageError when the CPU or build lacks it.
const Kernels& kernels_for(Isa isa);

/// Variants usable on this machine, scalar first.
std::vector<Isa> available_isas();

namespace detail {
const Kernels& scalar_kernels();
#if defined(TEXLAT_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
} // namespace detail

} // namespace texlat::simd
