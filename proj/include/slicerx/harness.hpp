#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "slicerx/channel.hpp"
#include "slicerx/equalizer.hpp"
#include "slicerx/frontend.hpp"
#include "slicerx/metrics.hpp"

namespace slicerx {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One experiment description: link, receiver, equalizers, and the sweep axes.
/// Every field has a default; JSON configs override per key.
struct ExperimentConfig {
    std::size_t symbols = 50000;
    std::size_t measurements = 5;
    std::uint64_t base_seed = 1;

    double baud_gbd = 32.0;
    unsigned sps_sim = 8;  // simulation rate, samples per symbol
    unsigned sps_dsp = 8;  // receiver DSP rate
    double rolloff = 0.1;
    unsigned rrc_span = 32;

    double mod_index = 0.0;  // 0 = tune for target_cspr_db per run
    double target_cspr_db = 6.0;

    double dispersion_ps_nm_km = 17.0;
    double loss_db_per_km = 0.2;
    double wavelength_nm = 1550.0;

    std::vector<double> distances_km = {0.0};
    std::vector<double> osnr_db = {30.0};

    SliceBank bank = SliceBank::default_four_slice();
    SliceSpec broadband = SliceBank::broadband();
    /// Receivers to sweep: each entry lists 1-based slice indices into the
    /// bank; an empty list is the broadband single-photodiode receiver.
    std::vector<std::vector<int>> slice_subsets = {{}};

    std::vector<std::string> equalizers = {"esn"};
    std::vector<std::size_t> esn_neurons = {500};
    double esn_leak_rate = 0.9;
    double esn_sparsity = 0.98;
    double esn_input_scale = 0.1;
    double esn_ridge_lambda = 1e-8;
    double esn_spectral_radius = 0.95;
    std::size_t esn_decision_delay = 3;
    std::size_t ffe_taps = 32;
    double ffe_step_size = 2e-3;
    std::size_t fnn_hidden = 32;
    unsigned fnn_window_symbols = 5;
    double train_fraction = 0.05;

    double pd_bandwidth_ghz = 40.0;
    double adc_bandwidth_ghz = 33.0;
    bool dac_scope_chain = false;  // model the DAC/scope rate conversions
    double dac_rate_gsa = 88.0;
    double scope_rate_gsa = 80.0;

    void validate() const;  // throws ConfigError
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig config_from_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);
/// Dotted-path override, e.g. "fiber.loss_db_per_km=0" or "symbols=10000".
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// One resolved sweep point.
struct PointSpec {
    double distance_km = 0.0;
    double osnr_db = 30.0;
    std::vector<int> subset;  // empty = broadband
    std::string equalizer = "esn";
    std::size_t n_neurons = 0;  // esn only

    std::size_t n_pds() const { return subset.empty() ? 1 : subset.size(); }
    std::string slice_label() const;
};

struct ResultRecord {
    PointSpec point;
    std::uint64_t seed = 0;
    bool is_summary = false;
    BerResult ber;
    TrainReport train;
    long sync_lag = 0;
    double wall_s = 0.0;
    std::string error;  // non-empty when the point failed

    bool failed() const { return !error.empty(); }
};

std::vector<PointSpec> enumerate_points(const ExperimentConfig& cfg);

/// Full chain for one sweep point and one measurement seed: bits, shaping,
/// modulator, fiber, amplifier noise, slicing, detection, digitization,
/// alignment, equalizer training and inference, decision, error counting.
/// Deterministic per (cfg, point, seed). Chain failures are captured in the
/// returned record, not thrown.
ResultRecord run_point(const ExperimentConfig& cfg, const PointSpec& point, std::uint64_t seed);

/// Cartesian sweep x measurement seeds (seed_i = base_seed ^ i) on a pool of
/// `jobs` workers, plus one aggregate record per point. Record content is
/// independent of `jobs`.
std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1);

/// Scientific notation, 3 significant digits, no leading zeros in the
/// exponent: 2.25e-4.
std::string format_ber(double v);

extern const char* const kCsvHeader;
void emit_csv(const std::vector<ResultRecord>& records, std::ostream& os);
void emit_json(const std::vector<ResultRecord>& records, std::ostream& os);
std::vector<ResultRecord> records_from_json(std::istream& is);
void write_records(const std::vector<ResultRecord>& records, const std::string& format,
                   const std::string& path);

/// Canned studies: reach comparison (1 vs 4 photodiodes, all equalizers),
/// slice-subset study, reservoir-size study.
ExperimentConfig fig3a_config(bool paper_scale = false);
ExperimentConfig fig3b_config(bool paper_scale = false);
ExperimentConfig fig3c_config(bool paper_scale = false);

}  // namespace slicerx
