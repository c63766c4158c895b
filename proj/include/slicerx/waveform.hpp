#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicerx {

/// Uniformly sampled complex envelope. Field and electrical signals share this
/// representation; electrical (real) signals simply carry zero imaginary parts.
struct ComplexWaveform {
    std::vector<std::complex<double>> samples;
    double sample_rate = 0.0;  // Hz

    ComplexWaveform() = default;
    ComplexWaveform(std::vector<std::complex<double>> s, double rate)
        : samples(std::move(s)), sample_rate(rate) {
        if (sample_rate <= 0.0) throw std::invalid_argument("waveform: sample_rate must be > 0");
        if (samples.empty()) throw std::invalid_argument("waveform: needs at least one sample");
    }

    std::size_t size() const { return samples.size(); }

    /// Sum of |x|^2 over all samples.
    double energy() const {
        double e = 0.0;
        for (const auto& v : samples) e += std::norm(v);
        return e;
    }

    /// Mean |x|^2.
    double power() const { return energy() / static_cast<double>(samples.size()); }
};

struct BitSequence {
    std::vector<std::uint8_t> bits;  // values in {0, 1}
    std::uint64_t seed = 0;          // bits regenerate exactly from seed + length
};

/// OOK amplitude levels, one per transmitted symbol (0 = light off, 1 = on).
struct SymbolSequence {
    std::vector<double> amplitudes;
};

SymbolSequence ook_map(const BitSequence& b);

struct FirFilter {
    std::vector<double> taps;
    std::size_t group_delay = 0;  // (len - 1) / 2 for the symmetric designs used here
};

/// Binary waveform dump. 16-byte header: magic "CWAV", u32 version, f64 sample
/// rate; then interleaved (re, im) f64 pairs. Little-endian throughout.
void write_cwav(const std::string& path, const ComplexWaveform& w);
ComplexWaveform read_cwav(const std::string& path);

}  // namespace slicerx
