#pragma once

#include <functional>
#include <span>

#include "slicerx/waveform.hpp"

namespace slicerx {

/// n i.i.d. uniform bits, reproducible from the seed.
BitSequence generate_bits(std::size_t n, std::uint64_t seed);

/// Unit-energy root-raised-cosine filter, span_symbols * sps + 1 taps.
FirFilter rrc_taps(double rolloff, unsigned sps, unsigned span_symbols = 32);

/// Zero-stuff symbols by sps, convolve with f, and drop the filter group delay
/// so symbol i lands centered on output sample i * sps. Output length is
/// symbols.size() * sps.
ComplexWaveform shape_symbols(std::span<const double> symbols, const FirFilter& f,
                              unsigned sps, double sample_rate);
ComplexWaveform shape_symbols(const SymbolSequence& symbols, const FirFilter& f,
                              unsigned sps, double sample_rate);

/// Complex frequency response sampled at absolute frequency in Hz,
/// defined over [-fs/2, fs/2).
using FreqResponse = std::function<std::complex<double>(double)>;

/// Circular frequency-domain filtering; length and rate preserved.
ComplexWaveform freq_filter(const ComplexWaveform& w, const FreqResponse& h);

/// Rational-ratio resampling in the frequency domain: band-limited
/// interpolation on upsampling, brick-wall anti-aliasing on downsampling.
/// The rate ratio must reduce to p/q with q <= 1e6.
ComplexWaveform resample(const ComplexWaveform& w, double target_rate);

/// Linear convolution of x with real taps (FFT-based above a size threshold).
std::vector<std::complex<double>> convolve(std::span<const std::complex<double>> x,
                                           std::span<const double> taps);

}  // namespace slicerx
