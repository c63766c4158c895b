#pragma once

#include <vector>

#include "slicerx/sigkit.hpp"
#include "slicerx/waveform.hpp"

namespace slicerx {

/// One optical bandpass of the slicing filter bank.
struct SliceSpec {
    double center_offset_ghz = 0.0;  // relative to the carrier
    double bandwidth_ghz = 0.0;      // full width
    int shape_order = 4;             // super-Gaussian order
};

/// Ordered low-to-high filter bank, 1 to 4 slices.
struct SliceBank {
    std::vector<SliceSpec> slices;

    void validate() const;

    /// Four contiguous equal-width slices covering the occupied band of a
    /// 32 GBd, 0.1 roll-off signal (+-17.6 GHz).
    static SliceBank default_four_slice();

    /// Wide single filter for the one-photodiode receiver; passes the whole
    /// signal band and strips out-of-band noise.
    static SliceSpec broadband();
};

/// Photodetected electrical channels, one per slice, equal length and rate.
struct DetectedChannels {
    std::vector<std::vector<double>> channels;
    double sample_rate = 0.0;

    std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Applies each slice filter (super-Gaussian magnitude response, zero phase)
/// to the field. Outputs stay time-aligned with the input.
std::vector<ComplexWaveform> wss_apply(const ComplexWaveform& w, const SliceBank& bank);

/// Square-law detection |E|^2 scaled by responsivity, then a 4th-order
/// Bessel-Thomson lowpass with the given 3-dB bandwidth.
std::vector<double> photodetect(const ComplexWaveform& field, double pd_bandwidth_ghz,
                                double responsivity = 1.0);

/// Receiver digitizer: analog-bandwidth lowpass, decimation to the converter
/// rate, then interpolation back up to the DSP rate. Rates equal to in_rate
/// skip their stage.
std::vector<double> adc(const std::vector<double>& ch, double in_rate, double analog_bandwidth_ghz,
                        double out_rate, double dsp_rate);

struct SyncError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyncResult {
    DetectedChannels aligned;
    long lag = 0;  // samples the receive path trailed the transmit pattern
};

/// Cross-correlates the detected channels (summed) against the shaped transmit
/// pattern and removes the common integer lag by circular shift. Throws
/// SyncError when the correlation peak is below 3x the RMS sidelobe level.
SyncResult synchronize(const DetectedChannels& rx, std::span<const double> tx_amplitudes,
                       unsigned sps, const FirFilter& shaping);

/// 4th-order Bessel-Thomson response with 3-dB frequency f3db_hz, evaluated at
/// frequency f_hz. Shared by the photodiode and digitizer models.
std::complex<double> bessel4_response(double f_hz, double f3db_hz);

}  // namespace slicerx
