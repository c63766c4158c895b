#include "slicerx/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicerx/fft.hpp"

namespace slicerx {

namespace {

// Delay-normalized 4th-order Bessel polynomial has |H| = 1/sqrt(2) at
// w = 2.113917675 rad/s.
constexpr double kBessel4ThreeDb = 2.113917674904215;

ComplexWaveform to_complex(const std::vector<double>& x, double rate) {
    std::vector<std::complex<double>> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i];
    return ComplexWaveform(std::move(s), rate);
}

std::vector<double> real_part(const ComplexWaveform& w) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w.samples[i].real();
    return out;
}

}  // namespace

std::complex<double> bessel4_response(double f_hz, double f3db_hz) {
    const std::complex<double> s(0.0, kBessel4ThreeDb * f_hz / f3db_hz);
    const auto s2 = s * s;
    const auto s3 = s2 * s;
    const auto s4 = s2 * s2;
    return 105.0 / (s4 + 10.0 * s3 + 45.0 * s2 + 105.0 * s + 105.0);
}

void SliceBank::validate() const {
    if (slices.empty() || slices.size() > 4)
        throw std::invalid_argument("slice bank: needs 1 to 4 slices");
    for (const auto& s : slices) {
        if (s.bandwidth_ghz <= 0.0) throw std::invalid_argument("slice bank: bandwidth must be > 0");
        if (s.shape_order < 1) throw std::invalid_argument("slice bank: shape order must be >= 1");
    }
    for (std::size_t i = 1; i < slices.size(); ++i) {
        if (!(slices[i - 1].center_offset_ghz < slices[i].center_offset_ghz))
            throw std::invalid_argument("slice bank: centers must be distinct and ascending");
    }
}

SliceBank SliceBank::default_four_slice() {
    // Four staggered wide slices over the +-17.6 GHz occupied band. Every
    // slice reaches the carrier, so each photodiode keeps a carrier-beat
    // (linear) term next to its self-beat products: slices 3+4 then act like a
    // carrier + upper-sideband receiver and slices 2+3 like an inner-band
    // receiver. Narrow equal-partition slices starve the photodiodes of
    // carrier and close the eye regardless of the equalizer.
    return SliceBank{{
        {-8.8, 17.6, 5},
        {-2.9, 17.6, 5},
        {2.9, 17.6, 5},
        {8.8, 17.6, 5},
    }};
}

SliceSpec SliceBank::broadband() { return SliceSpec{0.0, 50.0, 6}; }

std::vector<ComplexWaveform> wss_apply(const ComplexWaveform& w, const SliceBank& bank) {
    bank.validate();
    const double nyquist_ghz = w.sample_rate / 2e9;
    for (const auto& s : bank.slices) {
        if (std::abs(s.center_offset_ghz) + s.bandwidth_ghz / 2.0 > nyquist_ghz)
            throw std::invalid_argument("wss_apply: slice band exceeds the simulated Nyquist band");
    }
    std::vector<ComplexWaveform> out;
    out.reserve(bank.slices.size());
    for (const auto& s : bank.slices) {
        const double fc = s.center_offset_ghz * 1e9;
        const double half_bw = s.bandwidth_ghz * 1e9 / 2.0;
        const double expo = 2.0 * s.shape_order;
        out.push_back(freq_filter(w, [fc, half_bw, expo](double f) {
            const double x = std::abs(f - fc) / half_bw;
            return std::complex<double>(std::exp(-0.5 * std::pow(x, expo)), 0.0);
        }));
    }
    return out;
}

std::vector<double> photodetect(const ComplexWaveform& field, double pd_bandwidth_ghz,
                                double responsivity) {
    if (pd_bandwidth_ghz <= 0.0) throw std::invalid_argument("photodetect: bandwidth must be > 0");
    ComplexWaveform current;
    current.sample_rate = field.sample_rate;
    current.samples.resize(field.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        current.samples[i] = responsivity * std::norm(field.samples[i]);
    const double f3db = pd_bandwidth_ghz * 1e9;
    auto filtered = freq_filter(current, [f3db](double f) { return bessel4_response(f, f3db); });
    return real_part(filtered);
}

std::vector<double> adc(const std::vector<double>& ch, double in_rate, double analog_bandwidth_ghz,
                        double out_rate, double dsp_rate) {
    if (out_rate > in_rate) throw std::invalid_argument("adc: out_rate above the simulation rate");
    auto w = to_complex(ch, in_rate);
    const double f3db = analog_bandwidth_ghz * 1e9;
    if (f3db < in_rate)  // a cutoff beyond twice Nyquist is a wide-open front end
        w = freq_filter(w, [f3db](double f) { return bessel4_response(f, f3db); });
    if (out_rate != in_rate) w = resample(w, out_rate);
    if (dsp_rate != w.sample_rate) w = resample(w, dsp_rate);
    return real_part(w);
}

SyncResult synchronize(const DetectedChannels& rx, std::span<const double> tx_amplitudes,
                       unsigned sps, const FirFilter& shaping) {
    if (rx.channels.empty()) throw std::invalid_argument("synchronize: no channels");
    const std::size_t n = rx.size();
    if (n < tx_amplitudes.size() * sps)
        throw std::invalid_argument("synchronize: receive record shorter than the pattern");

    // Reference: the shaped zero-mean transmit pattern at the receive rate.
    std::vector<double> nrz(tx_amplitudes.size());
    for (std::size_t i = 0; i < nrz.size(); ++i) nrz[i] = 2.0 * tx_amplitudes[i] - 1.0;
    auto ref = shape_symbols(nrz, shaping, sps, rx.sample_rate);

    std::vector<std::complex<double>> sum(n, 0.0);
    for (const auto& ch : rx.channels)
        for (std::size_t i = 0; i < n; ++i) sum[i] += ch[i];
    double mean = 0.0;
    for (const auto& v : sum) mean += v.real();
    mean /= static_cast<double>(n);
    for (auto& v : sum) v -= mean;

    std::vector<std::complex<double>> pattern(n, 0.0);
    for (std::size_t i = 0; i < ref.size() && i < n; ++i) pattern[i] = ref.samples[i];

    auto fs = fft(sum);
    const auto fp = fft(pattern);
    for (std::size_t k = 0; k < n; ++k) fs[k] *= std::conj(fp[k]);
    const auto corr = ifft(fs);

    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double m = std::abs(corr[k]);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }

    // sidelobe RMS excluding +-2 symbols around the peak
    const std::size_t guard = 2 * sps;
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t d = std::min((k + n - best) % n, (best + n - k) % n);
        if (d <= guard) continue;
        acc += std::norm(corr[k]);
        ++cnt;
    }
    const double sidelobe_rms = cnt ? std::sqrt(acc / static_cast<double>(cnt)) : 0.0;
    if (best_mag < 3.0 * sidelobe_rms || sidelobe_rms == 0.0)
        throw SyncError("synchronize: correlation peak below 3x RMS sidelobe");

    SyncResult res;
    res.lag = best > n / 2 ? static_cast<long>(best) - static_cast<long>(n)
                           : static_cast<long>(best);
    res.aligned.sample_rate = rx.sample_rate;
    res.aligned.channels.resize(rx.channels.size());
    for (std::size_t c = 0; c < rx.channels.size(); ++c) {
        auto& dst = res.aligned.channels[c];
        dst.resize(n);
        // circular shift: everything upstream filters circularly, so the
        // wrapped region is real signal, not padding
        for (std::size_t i = 0; i < n; ++i) dst[i] = rx.channels[c][(i + best) % n];
    }
    return res;
}

}  // namespace slicerx
