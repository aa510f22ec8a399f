#pragma once

// Frequency-domain steerable filter pyramid.
//
// Grids are square with a power-of-two side s. Bin (i, j) of an s-point DFT
// holds the frequency (wy, wx) = 2*pi*(f_i, f_j)/s with signed bins f in
// [-s/2, s/2); r = |w| and theta = atan2(wy, wx), with theta = 0 at DC.
// Forward transforms are unscaled, inverse transforms scale by 1/s^2.
//
// Scale 0 is the finest level (side s); scale n is sampled at s / 2^n and
// the low-pass residual at s / 2^N. Bands are complex (half-plane angular
// support); only their real parts enter reconstructions.

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "texlat/image.hpp"

namespace texlat {

struct PyramidParams {
    std::size_t scales = 4;
    std::size_t orientations = 4;

    friend bool operator==(const PyramidParams&, const PyramidParams&) = default;
};

/// Smallest side allowed for the low-pass residual grid.
inline constexpr std::size_t kMinCoarsestSide = 4;

/// Throws UsageError unless a side x side image can be decomposed with these params.
void validate_pyramid_input(std::size_t side, const PyramidParams& params);

namespace filters {

/// Radial low-pass L(r): 2 below pi/4, 0 above pi/2, raised-cosine in between.
double radial_lowpass(double r);

/// Radial high-pass H(r): 0 below pi/4, 1 above pi/2, cos((pi/2) log2(2r/pi)) in
/// between. The constant branches are the continuous ones, which makes
/// H^2 + (L/2)^2 = 1 hold everywhere.
double radial_highpass(double r);

/// Angular normalization alpha_K = 2^(K-1) (K-1)! / sqrt(K (2(K-1))!).
double angular_gain(std::size_t orientations);

/// Angular window G_k(theta) = alpha_K cos(theta - pi k/K)^(K-1) on the half-open
/// half plane -pi/2 <= wrap(theta - pi k/K) < pi/2, zero elsewhere.
double angular(std::size_t k, std::size_t orientations, double theta);

/// Band-pass B_k(r, theta) = H(r) G_k(theta).
double bandpass(std::size_t k, std::size_t orientations, double r, double theta);

/// Initial low-pass L0(r) = L(r/2)/2.
double initial_lowpass(double r);

/// Initial high-pass H0(r) = H(r/2).
double initial_highpass(double r);

/// Radius and angle of DFT bin (i, j) on an s-point grid.
double bin_radius(std::size_t i, std::size_t j, std::size_t s);
double bin_angle(std::size_t i, std::size_t j, std::size_t s);

} // namespace filters

struct ComplexGrid {
    std::size_t side = 0;
    std::vector<std::complex<double>> values;
};

struct Pyramid {
    PyramidParams params;
    std::size_t side = 0;
    std::vector<ComplexGrid> bands;  // scale-major: bands[scale * K + orientation]
    Image lowpass;                   // side / 2^N
    Image highpass;                  // side

    std::size_t level_side(std::size_t scale) const { return side >> scale; }
    const ComplexGrid& band(std::size_t scale, std::size_t orientation) const;
    ComplexGrid& band(std::size_t scale, std::size_t orientation);
};

/// Linear combination a*P + b*Q of two pyramids with identical layout.
Pyramid combine(double a, const Pyramid& p, double b, const Pyramid& q);

Pyramid build_pyramid(const Image& img, const PyramidParams& params);

/// Exact synthesis; throws DataError when grid sizes are inconsistent.
Image collapse(const Pyramid& pyr);

/// Real-valued full-resolution back-projection of one band, others zeroed.
Image reconstruct_band(const Pyramid& pyr, std::size_t scale, std::size_t orientation);
Image reconstruct_lowpass(const Pyramid& pyr);
Image reconstruct_highpass(const Pyramid& pyr);

/// Full-resolution composite transfer functions of the pyramid paths for one
/// (side, params) pair, in DFT bin order. The analysis response of band (n, k)
/// maps the image spectrum to that band's spectrum before cropping; the
/// reconstruction responses are real, even, and map an image to the
/// back-projection of the corresponding pyramid component.
class PyramidResponses {
public:
    PyramidResponses(std::size_t side, const PyramidParams& params);

    std::size_t side() const { return side_; }
    const PyramidParams& params() const { return params_; }

    const std::vector<double>& band_analysis(std::size_t scale, std::size_t orientation) const;
    const std::vector<double>& band_reconstruction(std::size_t scale, std::size_t orientation) const;
    const std::vector<double>& lowpass_reconstruction() const { return lowpass_; }
    /// Low-pass back-projection further split by the angular pair G_k(t)^2 + G_k(t+pi)^2.
    const std::vector<double>& oriented_lowpass(std::size_t orientation) const;
    const std::vector<double>& highpass_reconstruction() const { return highpass_; }

    /// Shared cached instance.
    static std::shared_ptr<const PyramidResponses> get(std::size_t side, const PyramidParams& params);

private:
    std::size_t side_;
    PyramidParams params_;
    std::vector<std::vector<double>> analysis_;
    std::vector<std::vector<double>> reconstruction_;
    std::vector<std::vector<double>> oriented_lowpass_;
    std::vector<double> lowpass_;
    std::vector<double> highpass_;
};

} // namespace texlat
