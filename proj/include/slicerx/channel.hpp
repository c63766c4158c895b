#pragma once

#include <cstdint>

#include "slicerx/waveform.hpp"

namespace slicerx {

struct FiberParams {
    double length_km = 0.0;
    double dispersion_ps_nm_km = 17.0;  // D
    double loss_db_per_km = 0.2;
    double ref_wavelength_nm = 1550.0;

    /// beta2 = -D * lambda^2 / (2 pi c), in s^2/m.
    double beta2_s2_per_m() const;
};

/// Mach-Zehnder modulator biased at quadrature; only the modulation depth is
/// free. Zero drive sits at the half-power transmission point.
struct MzmParams {
    double mod_index = 1.0;  // in (0, 1]
};

struct MzmResult {
    ComplexWaveform field;
    std::size_t clipped_samples = 0;  // drive samples outside [-1, 1]
};

/// Field envelope E(t) = cos(pi/4 + (pi/4) * mod_index * drive(t)).
/// Drive outside [-1, 1] is clipped and counted.
MzmResult mzm_modulate(const ComplexWaveform& drive, const MzmParams& p);

/// Chromatic dispersion H(f) = exp(+j * 2 pi^2 * beta2 * L * f^2) followed by
/// scalar loss. The sign pairs with beta2 < 0 for anomalous dispersion so that
/// square-law detection fades as |cos(2 pi^2 beta2 L f^2)|.
ComplexWaveform propagate(const ComplexWaveform& w, const FiberParams& f);

/// Normalizes signal power to 1 and adds circular complex white Gaussian noise
/// sized so the noise power within a 12.5 GHz reference bandwidth equals
/// signal_power / 10^(osnr_db/10). An infinite osnr_db disables the noise.
ComplexWaveform amplify_to_osnr(const ComplexWaveform& w, double osnr_db, std::uint64_t seed);

/// Carrier-to-signal power ratio in dB from the periodogram; the carrier is
/// everything within +-carrier_halfwidth_hz of 0 Hz.
double measure_cspr_db(const ComplexWaveform& field, double carrier_halfwidth_hz = 150e6);

/// Bisects mod_index in [lo, hi] until the modulated field's CSPR reaches
/// target_cspr_db (CSPR decreases monotonically with drive depth).
double tune_mod_index_for_cspr(const ComplexWaveform& drive, double target_cspr_db,
                               double lo = 0.02, double hi = 1.0, int iters = 40);

}  // namespace slicerx
