#include "slicerx/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "slicerx/fft.hpp"
#include "slicerx/rng.hpp"
#include "slicerx/sigkit.hpp"

namespace slicerx {

namespace {
constexpr double kSpeedOfLight = 299792458.0;       // m/s
constexpr double kOsnrRefBandwidth = 12.5e9;        // Hz (0.1 nm at 1550 nm)
}  // namespace

double FiberParams::beta2_s2_per_m() const {
    const double lambda_m = ref_wavelength_nm * 1e-9;
    const double d_s_per_m2 = dispersion_ps_nm_km * 1e-6;  // ps/(nm km) -> s/m^2
    return -d_s_per_m2 * lambda_m * lambda_m / (2.0 * std::numbers::pi * kSpeedOfLight);
}

MzmResult mzm_modulate(const ComplexWaveform& drive, const MzmParams& p) {
    if (p.mod_index <= 0.0 || p.mod_index > 1.0)
        throw std::invalid_argument("mzm_modulate: mod_index must be in (0, 1]");
    MzmResult out;
    out.field.sample_rate = drive.sample_rate;
    out.field.samples.resize(drive.size());
    const double quarter_pi = std::numbers::pi / 4.0;
    for (std::size_t i = 0; i < drive.size(); ++i) {
        double d = drive.samples[i].real();
        if (d > 1.0 || d < -1.0) {
            ++out.clipped_samples;
            d = std::clamp(d, -1.0, 1.0);
        }
        out.field.samples[i] = std::cos(quarter_pi + quarter_pi * p.mod_index * d);
    }
    return out;
}

ComplexWaveform propagate(const ComplexWaveform& w, const FiberParams& f) {
    if (f.length_km == 0.0) return w;
    const double beta2 = f.beta2_s2_per_m();
    const double length_m = f.length_km * 1e3;
    const double phase_coeff = 2.0 * std::numbers::pi * std::numbers::pi * beta2 * length_m;
    auto out = freq_filter(w, [phase_coeff](double freq) {
        return std::polar(1.0, phase_coeff * freq * freq);
    });
    const double gain = std::pow(10.0, -f.loss_db_per_km * f.length_km / 20.0);
    for (auto& v : out.samples) v *= gain;
    return out;
}

ComplexWaveform amplify_to_osnr(const ComplexWaveform& w, double osnr_db, std::uint64_t seed) {
    const double p_sig = w.power();
    if (p_sig <= 0.0) throw std::invalid_argument("amplify_to_osnr: zero-power input");
    const double norm = 1.0 / std::sqrt(p_sig);
    ComplexWaveform out;
    out.sample_rate = w.sample_rate;
    out.samples.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out.samples[i] = w.samples[i] * norm;
    if (std::isinf(osnr_db)) return out;

    // Noise in the reference bandwidth = 10^(-osnr/10); spread over the full
    // simulation bandwidth that scales by fs / B_ref.
    const double noise_ref = std::pow(10.0, -osnr_db / 10.0);
    const double noise_total = noise_ref * (w.sample_rate / kOsnrRefBandwidth);
    const double sigma = std::sqrt(noise_total / 2.0);  // per quadrature
    Rng rng(derive_seed(seed, SeedTag::Noise));
    for (auto& v : out.samples) v += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
    return out;
}

double measure_cspr_db(const ComplexWaveform& field, double carrier_halfwidth_hz) {
    const auto spec = fft(field.samples);
    const std::size_t n = spec.size();
    double p_carrier = 0.0;
    double p_signal = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, field.sample_rate);
        const double p = std::norm(spec[k]);
        if (std::abs(f) <= carrier_halfwidth_hz)
            p_carrier += p;
        else
            p_signal += p;
    }
    if (p_signal <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p_carrier / p_signal);
}

double tune_mod_index_for_cspr(const ComplexWaveform& drive, double target_cspr_db,
                               double lo, double hi, int iters) {
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cspr = measure_cspr_db(mzm_modulate(drive, {mid}).field);
        if (cspr > target_cspr_db)
            lo = mid;  // too little modulation, deepen
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace slicerx
