#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace slicerx {

/// Forward DFT, unnormalized (sum convention), any length >= 1.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);

/// Inverse DFT including the 1/N factor, so ifft(fft(x)) == x.
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

/// Frequency of bin k for an n-point transform at sample rate fs.
/// Bins [0, ceil(n/2)) map to nonnegative frequencies, the rest wrap negative.
double bin_frequency(std::size_t k, std::size_t n, double fs);

}  // namespace slicerx
