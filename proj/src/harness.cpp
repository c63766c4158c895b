#include "slicerx/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "slicerx/esn.hpp"
#include "slicerx/ffe.hpp"
#include "slicerx/fnn.hpp"
#include "slicerx/rng.hpp"
#include "slicerx/sigkit.hpp"

namespace slicerx {

using nlohmann::json;

namespace {

double get_or(const json& j, const char* key, double d) {
    return j.contains(key) ? j.at(key).get<double>() : d;
}

template <typename T>
T get_or_t(const json& j, const char* key, T d) {
    return j.contains(key) ? j.at(key).get<T>() : d;
}

SliceSpec slice_from_json(const json& j) {
    SliceSpec s;
    s.center_offset_ghz = j.at("center_ghz").get<double>();
    s.bandwidth_ghz = j.at("bw_ghz").get<double>();
    s.shape_order = j.contains("order") ? j.at("order").get<int>() : 4;
    return s;
}

json slice_to_json(const SliceSpec& s) {
    return json{{"center_ghz", s.center_offset_ghz}, {"bw_ghz", s.bandwidth_ghz}, {"order", s.shape_order}};
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (symbols < 20 * washout_symbols(sps_dsp)) fail("symbols must be >= 20x the washout");
    if (measurements == 0) fail("measurements must be >= 1");
    if (baud_gbd <= 0.0) fail("baud must be > 0");
    if (sps_sim < 2 || sps_dsp < 1) fail("bad samples-per-symbol");
    if (rolloff < 0.0 || rolloff > 1.0) fail("rolloff out of [0,1]");
    if (train_fraction <= 0.0 || train_fraction >= 1.0) fail("train_fraction out of (0,1)");
    if (distances_km.empty() || osnr_db.empty() || slice_subsets.empty() || equalizers.empty())
        fail("sweep axes must be non-empty");
    try {
        bank.validate();
    } catch (const std::exception& e) {
        fail(e.what());
    }
    for (const auto& subset : slice_subsets) {
        for (int idx : subset) {
            if (idx < 1 || static_cast<std::size_t>(idx) > bank.slices.size())
                fail("slice subset references a slice outside the bank");
        }
    }
    for (const auto& eq : equalizers) {
        if (eq != "esn" && eq != "ffe" && eq != "fnn") fail("unknown equalizer '" + eq + "'");
    }
    if (esn_neurons.empty()) fail("esn neuron list must be non-empty");
    for (auto n : esn_neurons)
        if (n < 1 || n > 1000) fail("esn neurons supported in [1, 1000]");
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.symbols = get_or_t<std::size_t>(j, "symbols", c.symbols);
        c.measurements = get_or_t<std::size_t>(j, "measurements", c.measurements);
        c.base_seed = get_or_t<std::uint64_t>(j, "base_seed", c.base_seed);
        c.baud_gbd = get_or(j, "baud_gbd", c.baud_gbd);
        c.sps_sim = get_or_t<unsigned>(j, "sps_sim", c.sps_sim);
        c.sps_dsp = get_or_t<unsigned>(j, "sps_dsp", c.sps_dsp);
        c.rolloff = get_or(j, "rolloff", c.rolloff);
        c.rrc_span = get_or_t<unsigned>(j, "rrc_span", c.rrc_span);
        if (j.contains("mzm")) {
            c.mod_index = get_or(j["mzm"], "mod_index", c.mod_index);
            c.target_cspr_db = get_or(j["mzm"], "target_cspr_db", c.target_cspr_db);
        }
        if (j.contains("fiber")) {
            const auto& f = j["fiber"];
            c.dispersion_ps_nm_km = get_or(f, "dispersion_ps_nm_km", c.dispersion_ps_nm_km);
            c.loss_db_per_km = get_or(f, "loss_db_per_km", c.loss_db_per_km);
            c.wavelength_nm = get_or(f, "wavelength_nm", c.wavelength_nm);
        }
        c.distances_km = get_or_t<std::vector<double>>(j, "distances_km", c.distances_km);
        c.osnr_db = get_or_t<std::vector<double>>(j, "osnr_db", c.osnr_db);
        if (j.contains("slice_bank")) {
            c.bank.slices.clear();
            for (const auto& s : j["slice_bank"]) c.bank.slices.push_back(slice_from_json(s));
        }
        if (j.contains("broadband")) c.broadband = slice_from_json(j["broadband"]);
        if (j.contains("slice_subsets"))
            c.slice_subsets = j["slice_subsets"].get<std::vector<std::vector<int>>>();
        c.equalizers = get_or_t<std::vector<std::string>>(j, "equalizers", c.equalizers);
        if (j.contains("esn")) {
            const auto& e = j["esn"];
            c.esn_neurons = get_or_t<std::vector<std::size_t>>(e, "neurons", c.esn_neurons);
            c.esn_leak_rate = get_or(e, "leak_rate", c.esn_leak_rate);
            c.esn_sparsity = get_or(e, "sparsity", c.esn_sparsity);
            c.esn_input_scale = get_or(e, "input_scale", c.esn_input_scale);
            c.esn_ridge_lambda = get_or(e, "ridge_lambda", c.esn_ridge_lambda);
            c.esn_spectral_radius = get_or(e, "spectral_radius", c.esn_spectral_radius);
            c.esn_decision_delay = get_or_t<std::size_t>(e, "decision_delay", c.esn_decision_delay);
        }
        if (j.contains("ffe")) {
            c.ffe_taps = get_or_t<std::size_t>(j["ffe"], "taps", c.ffe_taps);
            c.ffe_step_size = get_or(j["ffe"], "step_size", c.ffe_step_size);
        }
        if (j.contains("fnn")) {
            c.fnn_hidden = get_or_t<std::size_t>(j["fnn"], "hidden", c.fnn_hidden);
            c.fnn_window_symbols = get_or_t<unsigned>(j["fnn"], "window_symbols", c.fnn_window_symbols);
        }
        c.train_fraction = get_or(j, "train_fraction", c.train_fraction);
        if (j.contains("receiver")) {
            const auto& r = j["receiver"];
            c.pd_bandwidth_ghz = get_or(r, "pd_bandwidth_ghz", c.pd_bandwidth_ghz);
            c.adc_bandwidth_ghz = get_or(r, "adc_bandwidth_ghz", c.adc_bandwidth_ghz);
        }
        c.dac_scope_chain = get_or_t<bool>(j, "dac_scope_chain", c.dac_scope_chain);
        c.dac_rate_gsa = get_or(j, "dac_rate_gsa", c.dac_rate_gsa);
        c.scope_rate_gsa = get_or(j, "scope_rate_gsa", c.scope_rate_gsa);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: bad field: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig config_from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["symbols"] = c.symbols;
    j["measurements"] = c.measurements;
    j["base_seed"] = c.base_seed;
    j["baud_gbd"] = c.baud_gbd;
    j["sps_sim"] = c.sps_sim;
    j["sps_dsp"] = c.sps_dsp;
    j["rolloff"] = c.rolloff;
    j["rrc_span"] = c.rrc_span;
    j["mzm"] = {{"mod_index", c.mod_index}, {"target_cspr_db", c.target_cspr_db}};
    j["fiber"] = {{"dispersion_ps_nm_km", c.dispersion_ps_nm_km},
                  {"loss_db_per_km", c.loss_db_per_km},
                  {"wavelength_nm", c.wavelength_nm}};
    j["distances_km"] = c.distances_km;
    j["osnr_db"] = c.osnr_db;
    j["slice_bank"] = json::array();
    for (const auto& s : c.bank.slices) j["slice_bank"].push_back(slice_to_json(s));
    j["broadband"] = slice_to_json(c.broadband);
    j["slice_subsets"] = c.slice_subsets;
    j["equalizers"] = c.equalizers;
    j["esn"] = {{"neurons", c.esn_neurons},
                {"leak_rate", c.esn_leak_rate},
                {"sparsity", c.esn_sparsity},
                {"input_scale", c.esn_input_scale},
                {"ridge_lambda", c.esn_ridge_lambda},
                {"spectral_radius", c.esn_spectral_radius},
                {"decision_delay", c.esn_decision_delay}};
    j["ffe"] = {{"taps", c.ffe_taps}, {"step_size", c.ffe_step_size}};
    j["fnn"] = {{"hidden", c.fnn_hidden}, {"window_symbols", c.fnn_window_symbols}};
    j["train_fraction"] = c.train_fraction;
    j["receiver"] = {{"pd_bandwidth_ghz", c.pd_bandwidth_ghz},
                     {"adc_bandwidth_ghz", c.adc_bandwidth_ghz}};
    j["dac_scope_chain"] = c.dac_scope_chain;
    j["dac_rate_gsa"] = c.dac_rate_gsa;
    j["scope_rate_gsa"] = c.scope_rate_gsa;
    return j.dump(2);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    // route through the JSON loader so overrides share the config schema
    json patch = json::parse(config_to_json(cfg));
    json* node = &patch;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (true) {
        const auto dot = key.find('.', start);
        parts.push_back(key.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    try {
        (*node)[parts.back()] = json::parse(value);
    } catch (const std::exception&) {
        (*node)[parts.back()] = value;  // bare strings
    }
    cfg = config_from_json(patch.dump());
}

std::string PointSpec::slice_label() const {
    if (subset.empty()) return "bb";
    std::string s;
    for (int idx : subset) s += std::to_string(idx);
    return s;
}

std::vector<PointSpec> enumerate_points(const ExperimentConfig& cfg) {
    std::vector<PointSpec> points;
    for (double dist : cfg.distances_km)
        for (double osnr : cfg.osnr_db)
            for (const auto& subset : cfg.slice_subsets)
                for (const auto& eq : cfg.equalizers) {
                    if (eq == "esn") {
                        for (auto n : cfg.esn_neurons)
                            points.push_back({dist, osnr, subset, eq, n});
                    } else {
                        points.push_back({dist, osnr, subset, eq, 0});
                    }
                }
    return points;
}

namespace {

std::unique_ptr<Equalizer> make_equalizer(const ExperimentConfig& cfg, const PointSpec& pt,
                                          std::uint64_t seed) {
    if (pt.equalizer == "esn") {
        EsnParams p;
        p.n_neurons = pt.n_neurons;
        p.leak_rate = cfg.esn_leak_rate;
        p.sparsity = cfg.esn_sparsity;
        p.input_scale = cfg.esn_input_scale;
        p.ridge_lambda = cfg.esn_ridge_lambda;
        p.spectral_radius = cfg.esn_spectral_radius;
        p.decision_delay_symbols = cfg.esn_decision_delay;
        p.seed = seed;
        return std::make_unique<EsnEqualizer>(p);
    }
    if (pt.equalizer == "ffe") {
        FfeParams p;
        p.n_taps = cfg.ffe_taps;
        p.step_size = cfg.ffe_step_size;
        return std::make_unique<FfeEqualizer>(p);
    }
    FnnParams p;
    p.hidden_neurons = cfg.fnn_hidden;
    p.window_symbols = cfg.fnn_window_symbols;
    p.sps = cfg.sps_dsp;
    p.train_fraction = cfg.train_fraction;
    p.seed = seed;
    return std::make_unique<FnnEqualizer>(p);
}

SliceBank bank_for_subset(const ExperimentConfig& cfg, const std::vector<int>& subset) {
    if (subset.empty()) return SliceBank{{cfg.broadband}};
    SliceBank b;
    auto sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    for (int idx : sorted) b.slices.push_back(cfg.bank.slices[static_cast<std::size_t>(idx - 1)]);
    return b;
}

}  // namespace

ResultRecord run_point(const ExperimentConfig& cfg, const PointSpec& pt, std::uint64_t seed) {
    ResultRecord rec;
    rec.point = pt;
    rec.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const double symbol_rate = cfg.baud_gbd * 1e9;
        const double rate_sim = symbol_rate * cfg.sps_sim;
        const double rate_dsp = symbol_rate * cfg.sps_dsp;

        const auto bits = generate_bits(cfg.symbols, seed);
        const auto amps = ook_map(bits);
        std::vector<double> nrz(cfg.symbols);
        for (std::size_t i = 0; i < cfg.symbols; ++i) nrz[i] = 2.0 * amps.amplitudes[i] - 1.0;

        // transmit shaping; optionally through the 2 sps DAC path
        ComplexWaveform tx;
        if (cfg.dac_scope_chain) {
            auto shaped = shape_symbols(nrz, rrc_taps(cfg.rolloff, 2, cfg.rrc_span), 2,
                                        symbol_rate * 2.0);
            tx = resample(resample(shaped, cfg.dac_rate_gsa * 1e9), rate_sim);
        } else {
            tx = shape_symbols(nrz, rrc_taps(cfg.rolloff, cfg.sps_sim, cfg.rrc_span), cfg.sps_sim,
                               rate_sim);
        }

        // Normalize to the 95th percentile of |tx| so the drive can reach the
        // modulator swing needed for the CSPR target; the overshoot tail clips
        // in the modulator like a driver amplifier would.
        std::vector<double> mags(tx.size());
        for (std::size_t i = 0; i < tx.size(); ++i) mags[i] = std::abs(tx.samples[i].real());
        std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(0.95 * mags.size()),
                         mags.end());
        const double scale = mags[static_cast<std::size_t>(0.95 * mags.size())];
        ComplexWaveform drive;
        drive.sample_rate = tx.sample_rate;
        drive.samples.resize(tx.size());
        // amplitude 1 maps to drive -1, the modulator's full-transmission side
        for (std::size_t i = 0; i < tx.size(); ++i)
            drive.samples[i] = std::clamp(-tx.samples[i].real() / scale, -1.0, 1.0);

        MzmParams mzm;
        mzm.mod_index = cfg.mod_index > 0.0 ? cfg.mod_index
                                            : tune_mod_index_for_cspr(drive, cfg.target_cspr_db);
        auto field = mzm_modulate(drive, mzm).field;

        FiberParams fiber;
        fiber.length_km = pt.distance_km;
        fiber.dispersion_ps_nm_km = cfg.dispersion_ps_nm_km;
        fiber.loss_db_per_km = cfg.loss_db_per_km;
        fiber.ref_wavelength_nm = cfg.wavelength_nm;
        field = propagate(field, fiber);
        field = amplify_to_osnr(field, pt.osnr_db, seed);

        const auto bank = bank_for_subset(cfg, pt.subset);
        const auto slices = wss_apply(field, bank);

        DetectedChannels rx;
        rx.sample_rate = rate_dsp;
        rx.channels.reserve(slices.size());
        const double scope_rate = cfg.dac_scope_chain ? cfg.scope_rate_gsa * 1e9 : rate_sim;
        for (const auto& s : slices) {
            auto ch = photodetect(s, cfg.pd_bandwidth_ghz);
            rx.channels.push_back(adc(ch, rate_sim, cfg.adc_bandwidth_ghz, scope_rate, rate_dsp));
        }

        auto sync = synchronize(rx, amps.amplitudes, cfg.sps_dsp,
                                rrc_taps(cfg.rolloff, cfg.sps_dsp, cfg.rrc_span));
        rec.sync_lag = sync.lag;

        const auto n_train = static_cast<std::size_t>(
            std::ceil(cfg.train_fraction * static_cast<double>(cfg.symbols)));
        auto eq = make_equalizer(cfg, pt, seed);
        rec.train = eq->train(sync.aligned,
                              std::span<const double>(amps.amplitudes.data(), n_train), cfg.sps_dsp);
        const auto soft = eq->equalize(sync.aligned, cfg.sps_dsp);

        // threshold from the post-washout training span
        const std::size_t wash = washout_symbols(cfg.sps_dsp);
        std::vector<double> train_soft;
        std::vector<std::uint8_t> train_bits;
        for (std::size_t s = std::max(wash, soft.first_symbol); s < n_train; ++s) {
            const std::size_t row = s - soft.first_symbol;
            if (row >= soft.values.size()) break;
            train_soft.push_back(soft.values[row]);
            train_bits.push_back(bits.bits[s]);
        }
        const auto decisions = hard_decide(soft.values, train_soft, train_bits);

        std::span<const std::uint8_t> truth(bits.bits.data() + soft.first_symbol,
                                            soft.values.size());
        const std::size_t skip = std::max(n_train, wash) - soft.first_symbol;
        rec.ber = count_ber(decisions, truth, skip);
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, unsigned jobs) {
    cfg.validate();
    const auto points = enumerate_points(cfg);
    const std::size_t per_point = cfg.measurements;
    std::vector<ResultRecord> measured(points.size() * per_point);

    std::atomic<std::size_t> next{0};
    const std::size_t total = measured.size();
    auto worker = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= total) return;
            const std::size_t p = t / per_point;
            const std::size_t m = t % per_point;
            measured[t] = run_point(cfg, points[p], cfg.base_seed ^ static_cast<std::uint64_t>(m));
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<ResultRecord> out;
    out.reserve(measured.size() + points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        ResultRecord summary;
        summary.point = points[p];
        summary.seed = cfg.base_seed;
        summary.is_summary = true;
        double ber_sum = 0.0;
        std::size_t ok = 0, failed = 0;
        for (std::size_t m = 0; m < per_point; ++m) {
            const auto& r = measured[p * per_point + m];
            out.push_back(r);
            summary.wall_s += r.wall_s;
            if (r.failed()) {
                ++failed;
                continue;
            }
            ++ok;
            ber_sum += r.ber.ber;
            summary.ber.errors += r.ber.errors;
            summary.ber.bits += r.ber.bits;
            summary.train.train_mse += r.train.train_mse;
        }
        if (ok > 0) {
            summary.ber.ber = ber_sum / static_cast<double>(ok);  // mean across measurements
            wilson_interval(summary.ber.errors, summary.ber.bits, summary.ber.ci95_low,
                            summary.ber.ci95_high);
            summary.ber.below_kp4 = summary.ber.ber < kKp4BerThreshold;
            summary.train.train_mse /= static_cast<double>(ok);
        }
        if (failed > 0)
            summary.error = std::to_string(failed) + "/" + std::to_string(per_point) +
                            " measurements failed";
        out.push_back(summary);
    }
    return out;
}

std::string format_ber(double v) {
    if (v == 0.0) return "0";
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    std::string s(buf);
    // 2.25e-04 -> 2.25e-4
    const auto e = s.find('e');
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    const bool neg = exp[0] == '-';
    std::size_t i = (exp[0] == '+' || exp[0] == '-') ? 1 : 0;
    while (i + 1 < exp.size() && exp[i] == '0') ++i;
    return mant + "e" + (neg ? "-" : "+") + exp.substr(i);
}

const char* const kCsvHeader =
    "distance_km,osnr_db,n_pds,slice_set,equalizer,n_neurons,seed,errors,bits,ber,ci_low,ci_high,"
    "below_kp4,train_mse,wall_s";

namespace {

std::string num(double v, const char* fmt = "%.6g") {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

void emit_csv(const std::vector<ResultRecord>& records, std::ostream& os) {
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        os << num(r.point.distance_km) << ',' << num(r.point.osnr_db) << ',' << r.point.n_pds()
           << ',' << r.point.slice_label() << ',' << r.point.equalizer << ',' << r.point.n_neurons
           << ',' << (r.is_summary ? std::string("mean") : std::to_string(r.seed)) << ','
           << r.ber.errors << ',' << r.ber.bits << ',' << (r.failed() && r.ber.bits == 0 ? "nan" : format_ber(r.ber.ber))
           << ',' << format_ber(r.ber.ci95_low) << ',' << format_ber(r.ber.ci95_high) << ','
           << (r.ber.below_kp4 ? "true" : "false") << ',' << num(r.train.train_mse) << ','
           << num(r.wall_s, "%.3f") << '\n';
    }
}

namespace {

json record_to_json(const ResultRecord& r) {
    json j;
    j["distance_km"] = r.point.distance_km;
    j["osnr_db"] = std::isinf(r.point.osnr_db) ? json() : json(r.point.osnr_db);
    j["slices"] = r.point.subset;
    j["slice_set"] = r.point.slice_label();
    j["n_pds"] = r.point.n_pds();
    j["equalizer"] = r.point.equalizer;
    j["n_neurons"] = r.point.n_neurons;
    j["seed"] = r.seed;
    j["summary"] = r.is_summary;
    j["errors"] = r.ber.errors;
    j["bits"] = r.ber.bits;
    j["ber"] = r.ber.ber;
    j["ci_low"] = r.ber.ci95_low;
    j["ci_high"] = r.ber.ci95_high;
    j["below_kp4"] = r.ber.below_kp4;
    j["train_mse"] = r.train.train_mse;
    j["train_samples"] = r.train.n_train_samples;
    j["train_converged"] = r.train.converged;
    j["train_iterations"] = r.train.iterations;
    j["sync_lag"] = r.sync_lag;
    j["wall_s"] = r.wall_s;
    j["error"] = r.error;
    return j;
}

ResultRecord record_from_json(const json& j) {
    ResultRecord r;
    r.point.distance_km = j.at("distance_km").get<double>();
    r.point.osnr_db = j.at("osnr_db").is_null() ? std::numeric_limits<double>::infinity()
                                                : j.at("osnr_db").get<double>();
    r.point.subset = j.at("slices").get<std::vector<int>>();
    r.point.equalizer = j.at("equalizer").get<std::string>();
    r.point.n_neurons = j.at("n_neurons").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.is_summary = j.at("summary").get<bool>();
    r.ber.errors = j.at("errors").get<std::uint64_t>();
    r.ber.bits = j.at("bits").get<std::uint64_t>();
    r.ber.ber = j.at("ber").get<double>();
    r.ber.ci95_low = j.at("ci_low").get<double>();
    r.ber.ci95_high = j.at("ci_high").get<double>();
    r.ber.below_kp4 = j.at("below_kp4").get<bool>();
    r.train.train_mse = j.at("train_mse").get<double>();
    r.train.n_train_samples = j.at("train_samples").get<std::size_t>();
    r.train.converged = j.at("train_converged").get<bool>();
    r.train.iterations = j.at("train_iterations").get<std::size_t>();
    r.sync_lag = j.at("sync_lag").get<long>();
    r.wall_s = j.at("wall_s").get<double>();
    r.error = j.at("error").get<std::string>();
    return r;
}

}  // namespace

void emit_json(const std::vector<ResultRecord>& records, std::ostream& os) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    os << arr.dump(1) << '\n';
}

std::vector<ResultRecord> records_from_json(std::istream& is) {
    json arr = json::parse(is);
    std::vector<ResultRecord> out;
    out.reserve(arr.size());
    for (const auto& j : arr) out.push_back(record_from_json(j));
    return out;
}

void write_records(const std::vector<ResultRecord>& records, const std::string& format,
                   const std::string& path) {
    if (format != "json" && format != "csv")
        throw ConfigError("unknown output format '" + format + "'");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    if (format == "json")
        emit_json(records, os);
    else
        emit_csv(records, os);
    if (!os) throw std::runtime_error("write failed for " + path);
}

namespace {

ExperimentConfig canned_base(bool paper_scale) {
    ExperimentConfig c;
    if (paper_scale) {
        c.symbols = 200000;
        c.measurements = 10;
    }
    c.osnr_db = {30.0};  // lab OSNR per span is unreported; fixed here
    return c;
}

}  // namespace

ExperimentConfig fig3a_config(bool paper_scale) {
    auto c = canned_base(paper_scale);
    c.distances_km = {0.0, 5.0, 40.0, 80.0};
    c.slice_subsets = {{}, {1, 2, 3, 4}};
    c.equalizers = {"ffe", "esn", "fnn"};
    c.esn_neurons = {500};
    return c;
}

ExperimentConfig fig3b_config(bool paper_scale) {
    auto c = canned_base(paper_scale);
    c.distances_km = {40.0, 55.0, 80.0};
    c.slice_subsets = {{}, {2, 3}, {3, 4}, {1, 2, 3, 4}};
    c.equalizers = {"esn"};
    c.esn_neurons = {500};
    return c;
}

ExperimentConfig fig3c_config(bool paper_scale) {
    auto c = canned_base(paper_scale);
    c.distances_km = {80.0};
    c.slice_subsets = {{1, 2, 3, 4}};
    c.equalizers = {"esn"};
    c.esn_neurons = {50, 100, 200, 500};
    return c;
}

}  // namespace slicerx
