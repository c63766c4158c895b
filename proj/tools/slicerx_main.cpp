#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "slicerx/channel.hpp"
#include "slicerx/esn.hpp"
#include "slicerx/harness.hpp"
#include "slicerx/metrics.hpp"
#include "slicerx/rng.hpp"
#include "slicerx/sigkit.hpp"

using namespace slicerx;

namespace {

struct SweepOptions {
    std::string out = "results.csv";
    std::string format = "csv";
    unsigned jobs = 1;
    bool paper_scale = false;
    std::vector<std::string> overrides;
};

void add_sweep_options(CLI::App* app, SweepOptions& opt) {
    app->add_option("--out", opt.out, "output file path");
    app->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--paper-scale", opt.paper_scale, "200k symbols x 10 measurements");
    app->add_option("--set", opt.overrides, "config override, e.g. --set fiber.loss_db_per_km=0");
}

int execute_sweep(ExperimentConfig cfg, const SweepOptions& opt) {
    if (opt.paper_scale) {
        cfg.symbols = 200000;
        cfg.measurements = 10;
    }
    for (const auto& o : opt.overrides) apply_override(cfg, o);
    cfg.validate();

    const auto records = run_sweep(cfg, opt.jobs);
    write_records(records, opt.format, opt.out);

    std::size_t failures = 0;
    for (const auto& r : records) {
        if (r.is_summary) {
            std::printf("%6.1f km  osnr %5.1f dB  %zu pd [%-4s]  %-3s n=%-4zu  mean ber %-9s %s\n",
                        r.point.distance_km, r.point.osnr_db, r.point.n_pds(),
                        r.point.slice_label().c_str(), r.point.equalizer.c_str(),
                        r.point.n_neurons, format_ber(r.ber.ber).c_str(),
                        r.failed() ? r.error.c_str() : (r.ber.below_kp4 ? "below KP4" : ""));
        } else if (r.failed()) {
            ++failures;
        }
    }
    std::printf("wrote %s (%zu records)\n", opt.out.c_str(), records.size());
    if (failures > 0) {
        std::fprintf(stderr, "%zu sweep point measurements failed\n", failures);
        return 2;
    }
    return 0;
}

bool report(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    return ok;
}

/// Fast oracle checks of the numerical core.
int selftest() {
    bool all = true;

    {
        // state update against direct arithmetic on random small instances
        Rng rng(12);
        bool ok = true;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            const auto n = static_cast<Eigen::Index>(1 + rng.index(8));
            EsnModel m;
            m.params.leak_rate = rng.uniform(0.1, 1.0);
            m.params.n_neurons = static_cast<std::size_t>(n);
            m.n_inputs = 1;
            m.w_in.resize(n, 2);
            for (Eigen::Index i = 0; i < m.w_in.size(); ++i)
                m.w_in.data()[i] = rng.uniform(-1.0, 1.0);
            Eigen::MatrixXd dense(n, n);
            for (Eigen::Index i = 0; i < dense.size(); ++i)
                dense.data()[i] = rng.uniform(-1.0, 1.0);
            m.w_res = dense.sparseView();
            m.state.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) m.state[i] = rng.uniform(-1.0, 1.0);
            Eigen::VectorXd u(2);
            u << 1.0, rng.uniform(-2.0, 2.0);
            const Eigen::VectorXd prev = m.state;
            esn_step(m, u);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double pre = m.w_in.row(i).dot(u) + dense.row(i).dot(prev);
                const double want =
                    m.params.leak_rate * std::tanh(pre) + (1.0 - m.params.leak_rate) * prev[i];
                if (std::abs(m.state[i] - want) > 1e-12) ok = false;
            }
        }
        all &= report("reservoir update equals direct evaluation", ok);
    }

    {
        // dispersion composition and inverse
        Rng rng(5);
        std::vector<std::complex<double>> x(4096);
        for (auto& v : x) v = {rng.normal(), rng.normal()};
        const ComplexWaveform w(x, 256e9);
        FiberParams f40, f80, inv;
        f40.length_km = 40;
        f80.length_km = 80;
        inv.length_km = 80;
        inv.dispersion_ps_nm_km = -17.0;
        f40.loss_db_per_km = f80.loss_db_per_km = inv.loss_db_per_km = 0.0;
        const auto two = propagate(propagate(w, f40), f40);
        const auto one = propagate(w, f80);
        double acc = 0.0, undo = 0.0;
        const auto back = propagate(one, inv);
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc += std::norm(two.samples[i] - one.samples[i]);
            undo += std::norm(back.samples[i] - w.samples[i]);
        }
        const bool ok = std::sqrt(acc / w.size()) < 1e-9 && std::sqrt(undo / w.size()) < 1e-9;
        all &= report("dispersion composes and inverts", ok);
    }

    {
        const auto f = rrc_taps(0.1, 2, 32);
        double e = 0.0;
        for (double t : f.taps) e += t * t;
        const bool ok = std::abs(e - 1.0) < 1e-12 &&
                        f.taps[f.group_delay] >= *std::max_element(f.taps.begin(), f.taps.end());
        all &= report("rrc taps are unit energy with center peak", ok);
    }

    {
        // analytic fading notch for 80 km standard fiber
        const double f_hz = std::sqrt(299792458.0 / (2.0 * std::pow(1550e-9, 2) * 17e-6 * 80e3));
        all &= report("80 km fading notch lands at 6.8 GHz", std::abs(f_hz - 6.8e9) < 0.2e9);
    }

    {
        double lo = 0.0, hi = 0.0;
        wilson_interval(45, 200000, lo, hi);
        const bool ok = lo < 2.25e-4 && hi > 2.25e-4 && format_ber(45.0 / 200000.0) == "2.25e-4";
        all &= report("ber estimate and formatting contract", ok);
    }

    std::printf("%s\n", all ? "selftest passed" : "selftest FAILED");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slicerx: spectrally-sliced direct-detection link simulator and equalizer bench"};
    app.require_subcommand(1);

    std::string config_path;
    SweepOptions run_opt, a_opt, b_opt, c_opt;

    auto* run = app.add_subcommand("run", "run the sweep described by a JSON config");
    run->add_option("config", config_path, "config file")->required();
    add_sweep_options(run, run_opt);

    auto* fig3a = app.add_subcommand("fig3a", "reach study: 1 vs 4 photodiodes, all equalizers");
    add_sweep_options(fig3a, a_opt);
    auto* fig3b = app.add_subcommand("fig3b", "slice-subset study with the 500-neuron reservoir");
    add_sweep_options(fig3b, b_opt);
    auto* fig3c = app.add_subcommand("fig3c", "reservoir-size study at 80 km");
    add_sweep_options(fig3c, c_opt);
    auto* self = app.add_subcommand("selftest", "run the built-in oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return execute_sweep(config_from_file(config_path), run_opt);
        if (fig3a->parsed()) return execute_sweep(fig3a_config(a_opt.paper_scale), a_opt);
        if (fig3b->parsed()) return execute_sweep(fig3b_config(b_opt.paper_scale), b_opt);
        if (fig3c->parsed()) return execute_sweep(fig3c_config(c_opt.paper_scale), c_opt);
        if (self->parsed()) return selftest();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
