#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace texlat::fft {

using cplx = std::complex<double>;

/// In-place 2-D DFT of a square n x n row-major grid (unscaled).
void forward(std::span<cplx> grid, std::size_t n);

/// In-place inverse 2-D DFT, scaled by 1/(n*n).
void inverse(std::span<cplx> grid, std::size_t n);

/// Signed frequency index of DFT bin i on an n-point axis: [-n/2, n/2).
inline long signed_bin(std::size_t i, std::size_t n) {
    return i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

/// Keeps the central m x m block of frequencies (bins in [-m/2, m/2)) of an n x n spectrum.
std::vector<cplx> crop(std::span<const cplx> spectrum, std::size_t n, std::size_t m);

/// Inverse of crop: embeds an m x m spectrum into a zero n x n spectrum.
std::vector<cplx> pad(std::span<const cplx> spectrum, std::size_t m, std::size_t n);

/// Index of the bin holding frequency -w for the bin at index i.
inline std::size_t mirror_bin(std::size_t i, std::size_t n) { return i == 0 ? 0 : n - i; }

} // namespace texlat::fft
