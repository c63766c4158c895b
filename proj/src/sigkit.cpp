#include "slicerx/sigkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "slicerx/fft.hpp"
#include "slicerx/rng.hpp"

namespace slicerx {

namespace {

constexpr std::size_t kFftConvThreshold = 4096;  // direct convolution below this

/// Best rational approximation p/q of r with q <= max_den (continued fractions).
struct Ratio {
    long long p = 0;
    long long q = 1;
};

Ratio rationalize(double r, long long max_den) {
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = r;
    for (int i = 0; i < 64; ++i) {
        const double fl = std::floor(x);
        const long long a = static_cast<long long>(fl);
        const long long p2 = a * p1 + p0;
        const long long q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return {p1, q1};
}

}  // namespace

SymbolSequence ook_map(const BitSequence& b) {
    SymbolSequence s;
    s.amplitudes.reserve(b.bits.size());
    for (auto bit : b.bits) s.amplitudes.push_back(bit ? 1.0 : 0.0);
    return s;
}

BitSequence generate_bits(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("generate_bits: n must be >= 1");
    BitSequence out;
    out.seed = seed;
    out.bits.resize(n);
    Rng rng(derive_seed(seed, SeedTag::Bits));
    for (auto& b : out.bits) b = rng.bit();
    return out;
}

FirFilter rrc_taps(double rolloff, unsigned sps, unsigned span_symbols) {
    if (rolloff < 0.0 || rolloff > 1.0) throw std::invalid_argument("rrc_taps: rolloff out of [0,1]");
    if (sps < 1) throw std::invalid_argument("rrc_taps: sps must be >= 1");
    if (span_symbols < 2) throw std::invalid_argument("rrc_taps: span must be >= 2 symbols");

    const std::size_t len = static_cast<std::size_t>(span_symbols) * sps + 1;
    const std::size_t mid = (len - 1) / 2;
    std::vector<double> taps(len);
    const double b = rolloff;
    for (std::size_t i = 0; i < len; ++i) {
        // t in symbol periods
        const double t = (static_cast<double>(i) - static_cast<double>(mid)) / sps;
        double h;
        if (std::abs(t) < 1e-12) {
            h = 1.0 + b * (4.0 / std::numbers::pi - 1.0);
        } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
            const double a = std::numbers::pi / (4.0 * b);
            h = (b / std::numbers::sqrt2) *
                ((1.0 + 2.0 / std::numbers::pi) * std::sin(a) +
                 (1.0 - 2.0 / std::numbers::pi) * std::cos(a));
        } else {
            const double num = std::sin(std::numbers::pi * t * (1.0 - b)) +
                               4.0 * b * t * std::cos(std::numbers::pi * t * (1.0 + b));
            const double den = std::numbers::pi * t * (1.0 - 16.0 * b * b * t * t);
            h = num / den;
        }
        taps[i] = h;
    }
    double e = 0.0;
    for (double v : taps) e += v * v;
    const double norm = 1.0 / std::sqrt(e);
    for (double& v : taps) v *= norm;
    return FirFilter{std::move(taps), mid};
}

std::vector<std::complex<double>> convolve(std::span<const std::complex<double>> x,
                                           std::span<const double> taps) {
    const std::size_t n = x.size();
    const std::size_t m = taps.size();
    if (n == 0 || m == 0) throw std::invalid_argument("convolve: empty operand");
    const std::size_t out_len = n + m - 1;
    if (out_len < kFftConvThreshold) {
        std::vector<std::complex<double>> y(out_len, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < m; ++k) y[i + k] += x[i] * taps[k];
        return y;
    }
    std::vector<std::complex<double>> a(x.begin(), x.end());
    a.resize(out_len, 0.0);
    std::vector<std::complex<double>> b(out_len, 0.0);
    for (std::size_t k = 0; k < m; ++k) b[k] = taps[k];
    auto fa = fft(a);
    const auto fb = fft(b);
    for (std::size_t k = 0; k < out_len; ++k) fa[k] *= fb[k];
    return ifft(fa);
}

ComplexWaveform shape_symbols(std::span<const double> symbols, const FirFilter& f,
                              unsigned sps, double sample_rate) {
    if (symbols.empty()) throw std::invalid_argument("shape_symbols: empty symbol sequence");
    if (sps < 1) throw std::invalid_argument("shape_symbols: sps must be >= 1");
    const std::size_t n = symbols.size();
    std::vector<std::complex<double>> up(n * sps, 0.0);
    for (std::size_t i = 0; i < n; ++i) up[i * sps] = symbols[i];
    auto full = convolve(up, f.taps);
    // drop the group delay so symbol i peaks at sample i*sps
    std::vector<std::complex<double>> out(n * sps);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[i + f.group_delay];
    return ComplexWaveform(std::move(out), sample_rate);
}

ComplexWaveform shape_symbols(const SymbolSequence& symbols, const FirFilter& f,
                              unsigned sps, double sample_rate) {
    return shape_symbols(std::span<const double>(symbols.amplitudes), f, sps, sample_rate);
}

ComplexWaveform freq_filter(const ComplexWaveform& w, const FreqResponse& h) {
    const std::size_t n = w.size();
    auto spec = fft(w.samples);
    for (std::size_t k = 0; k < n; ++k) spec[k] *= h(bin_frequency(k, n, w.sample_rate));
    return ComplexWaveform(ifft(spec), w.sample_rate);
}

ComplexWaveform resample(const ComplexWaveform& w, double target_rate) {
    if (target_rate <= 0.0) throw std::invalid_argument("resample: target_rate must be > 0");
    if (target_rate == w.sample_rate) return w;

    const double ratio = target_rate / w.sample_rate;
    const Ratio r = rationalize(ratio, 1000000);
    if (r.q <= 0 || std::abs(static_cast<double>(r.p) / static_cast<double>(r.q) - ratio) >
                        1e-9 * ratio) {
        throw std::invalid_argument("resample: rate ratio needs denominator > 1e6");
    }

    const std::size_t n = w.size();
    const std::size_t m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio)));

    auto spec = fft(w.samples);
    std::vector<std::complex<double>> out_spec(m, 0.0);
    const std::size_t keep = std::min(n, m);
    const std::size_t pos = (keep + 1) / 2;   // nonnegative-frequency bins kept
    const std::size_t neg = keep / 2;         // negative-frequency bins kept
    const double scale = static_cast<double>(m) / static_cast<double>(n);
    for (std::size_t k = 0; k < pos; ++k) out_spec[k] = spec[k] * scale;
    for (std::size_t k = 1; k <= neg; ++k) out_spec[m - k] = spec[n - k] * scale;
    if (keep % 2 == 0 && keep == n && m > n) {
        // upsampling across an even-length input: split the Nyquist bin so real
        // signals stay real
        const auto nyq = spec[n / 2] * (0.5 * scale);
        out_spec[n / 2] = nyq;
        out_spec[m - n / 2] = nyq;
    }
    return ComplexWaveform(ifft(out_spec), target_rate);
}

void write_cwav(const std::string& path, const ComplexWaveform& w) {
    static_assert(std::endian::native == std::endian::little, "cwav writer assumes little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_cwav: cannot open " + path);
    const char magic[4] = {'C', 'W', 'A', 'V'};
    const std::uint32_t version = 1;
    os.write(magic, 4);
    os.write(reinterpret_cast<const char*>(&version), sizeof(version));
    os.write(reinterpret_cast<const char*>(&w.sample_rate), sizeof(double));
    os.write(reinterpret_cast<const char*>(w.samples.data()),
             static_cast<std::streamsize>(w.samples.size() * sizeof(std::complex<double>)));
    if (!os) throw std::runtime_error("write_cwav: write failed for " + path);
}

ComplexWaveform read_cwav(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_cwav: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    double rate = 0.0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), sizeof(version));
    is.read(reinterpret_cast<char*>(&rate), sizeof(rate));
    if (!is || std::memcmp(magic, "CWAV", 4) != 0 || version != 1)
        throw std::runtime_error("read_cwav: bad header in " + path);
    std::vector<std::complex<double>> samples;
    std::complex<double> v;
    while (is.read(reinterpret_cast<char*>(&v), sizeof(v))) samples.push_back(v);
    if (samples.empty()) throw std::runtime_error("read_cwav: no samples in " + path);
    for (const auto& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::runtime_error("read_cwav: non-finite sample in " + path);
    }
    return ComplexWaveform(std::move(samples), rate);
}

}  // namespace slicerx
