// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Sweep points are memoized and shared across criteria so the whole run
// fits a laptop-scale time budget.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "slicerx/channel.hpp"
#include "slicerx/esn.hpp"
#include "slicerx/ffe.hpp"
#include "slicerx/fft.hpp"
#include "slicerx/harness.hpp"
#include "slicerx/metrics.hpp"
#include "slicerx/rng.hpp"
#include "slicerx/sigkit.hpp"

using namespace slicerx;

namespace {

const auto g_suite_start = std::chrono::steady_clock::now();

double elapsed_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_suite_start).count();
}

constexpr std::uint64_t kBaseSeed = 1;

ExperimentConfig desk_config() {
    ExperimentConfig cfg;  // 50k symbols, OSNR 30 dB, default bank
    return cfg;
}

struct TaskKey {
    double km;
    std::string slices;
    std::string eq;
    std::size_t neurons;
    std::uint64_t seed_idx;
    auto operator<=>(const TaskKey&) const = default;
};

std::map<TaskKey, ResultRecord> g_cache;
std::mutex g_cache_mutex;

PointSpec to_point(const TaskKey& k) {
    PointSpec pt;
    pt.distance_km = k.km;
    pt.osnr_db = 30.0;
    for (char c : k.slices)
        if (c != 'b') pt.subset.push_back(c - '0');
    pt.equalizer = k.eq;
    pt.n_neurons = k.neurons;
    return pt;
}

/// Computes any missing records on a small worker pool, then serves the cache.
void prefetch(const std::vector<TaskKey>& keys) {
    std::vector<TaskKey> missing;
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        for (const auto& k : keys)
            if (!g_cache.count(k)) missing.push_back(k);
    }
    if (missing.empty()) return;
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 4u);
    auto worker = [&]() {
        const auto cfg = desk_config();
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= missing.size()) return;
            const auto& k = missing[t];
            auto rec = run_point(cfg, to_point(k), kBaseSeed ^ k.seed_idx);
            std::lock_guard<std::mutex> lock(g_cache_mutex);
            g_cache.emplace(k, std::move(rec));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

const ResultRecord& record(double km, const std::string& slices, const std::string& eq,
                           std::size_t neurons, std::uint64_t seed_idx) {
    const TaskKey k{km, slices, eq, neurons, seed_idx};
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_cache.find(k);
        if (it != g_cache.end()) return it->second;
    }
    prefetch({k});
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return g_cache.at(k);
}

/// BER guarded away from zero by the rule-of-thumb bound 1/(2n).
double ber_floor(const BerResult& r) {
    return std::max(r.ber, 0.5 / static_cast<double>(r.bits));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void verdict(int criterion, bool ok, const std::string& text) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, text.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, ": ", text);
}

std::string strip_wall_column(const std::string& csv) {
    std::istringstream is(csv);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        const auto cut = line.rfind(',');
        os << line.substr(0, cut) << '\n';
    }
    return os.str();
}

}  // namespace

TEST_CASE("criterion 1: back-to-back and 5 km below KP4 for all three equalizers") {
    std::vector<TaskKey> keys;
    for (double km : {0.0, 5.0})
        for (const char* eq : {"ffe", "esn", "fnn"})
            for (std::uint64_t s : {0, 1})
                keys.push_back({km, "bb", eq, std::string(eq) == "esn" ? 500ul : 0ul, s});
    prefetch(keys);

    bool ok = true;
    double worst_wall = 0.0;
    for (double km : {0.0, 5.0}) {
        for (const char* eq : {"ffe", "esn", "fnn"}) {
            std::uint64_t errors = 0, bits = 0;
            for (std::uint64_t s : {0, 1}) {
                const auto& r = record(km, "bb", eq, std::string(eq) == "esn" ? 500 : 0, s);
                REQUIRE_MESSAGE(r.error.empty(), r.error);
                errors += r.ber.errors;
                bits += r.ber.bits;
                worst_wall = std::max(worst_wall, r.wall_s);
            }
            const double ber = static_cast<double>(errors) / static_cast<double>(bits);
            const bool below = ber < kKp4BerThreshold && bits >= 50000;
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%.0f km 1-pd %s: ber %s over %llu bits", km, eq,
                          format_ber(ber).c_str(), static_cast<unsigned long long>(bits));
            verdict(1, below, buf);
            ok &= below;
        }
    }
    const bool runtime_ok = worst_wall <= 120.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "slowest point %.1f s (budget 120 s)", worst_wall);
    verdict(1, runtime_ok, buf);
    CHECK(ok);
}

TEST_CASE("criterion 2: power fading kills the 1-pd receiver at 40 km and beyond") {
    std::vector<TaskKey> keys;
    for (double km : {40.0, 80.0})
        for (const char* eq : {"ffe", "esn", "fnn"})
            for (std::uint64_t s = 0; s < 5; ++s)
                keys.push_back({km, "bb", eq, std::string(eq) == "esn" ? 500ul : 0ul, s});
    prefetch(keys);

    // point estimate = mean BER across the five measurement seeds, the same
    // aggregate the sweep harness reports
    for (double km : {40.0, 80.0}) {
        bool ok = true;
        std::string detail;
        for (const char* eq : {"ffe", "esn", "fnn"}) {
            double sum = 0.0;
            for (std::uint64_t s = 0; s < 5; ++s) {
                const auto& r = record(km, "bb", eq, std::string(eq) == "esn" ? 500 : 0, s);
                REQUIRE_MESSAGE(r.error.empty(), r.error);
                sum += r.ber.ber;
            }
            const double mean = sum / 5.0;
            ok &= mean > 1e-2;
            detail += std::string(" ") + eq + "=" + format_ber(mean);
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.0f km 1-pd mean ber above 1e-2:%s", km, detail.c_str());
        verdict(2, ok, buf);
    }

    // the simulated RF notch at 80 km against the analytic location
    const double analytic =
        std::sqrt(299792458.0 / (2.0 * std::pow(1550e-9, 2) * 17e-6 * 80e3));
    FiberParams f80;
    f80.length_km = 80.0;
    f80.loss_db_per_km = 0.0;
    const double fs = 256e9;
    const std::size_t n = 1 << 14;
    double best_f = 0.0, best_amp = 1e300;
    for (double ghz = 5.0; ghz <= 8.5; ghz += 0.05) {
        const auto k0 = static_cast<std::size_t>(std::llround(ghz * 1e9 * n / fs));
        const double f0 = static_cast<double>(k0) * fs / n;
        std::vector<std::complex<double>> d(n);
        for (std::size_t i = 0; i < n; ++i)
            d[i] = 0.05 * std::cos(2.0 * std::numbers::pi * f0 * i / fs);
        const auto field = propagate(mzm_modulate(ComplexWaveform(d, fs), {1.0}).field, f80);
        std::vector<std::complex<double>> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = std::norm(field.samples[i]);
        const auto spec = fft(sq);
        if (std::abs(spec[k0]) < best_amp) {
            best_amp = std::abs(spec[k0]);
            best_f = f0;
        }
    }
    const bool notch_ok = std::abs(best_f - 6.8e9) < 0.2e9 && std::abs(best_f - analytic) < 0.2e9;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "80 km notch: swept-tone %.2f GHz vs analytic %.2f GHz",
                  best_f / 1e9, analytic / 1e9);
    verdict(2, notch_ok, buf);
    CHECK(notch_ok);
}

TEST_CASE("criterion 3: four slices buy at least 10x over one photodiode at 80 km") {
    std::vector<TaskKey> keys;
    for (std::uint64_t s = 0; s < 5; ++s) {
        keys.push_back({80.0, "bb", "esn", 500, s});
        keys.push_back({80.0, "1234", "esn", 500, s});
    }
    prefetch(keys);

    std::vector<double> ratios;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto& one = record(80.0, "bb", "esn", 500, s);
        const auto& four = record(80.0, "1234", "esn", 500, s);
        REQUIRE(one.error.empty());
        REQUIRE(four.error.empty());
        ratios.push_back(one.ber.ber / ber_floor(four.ber));
    }
    const double med = median(ratios);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "median 1-pd/4-pd ber ratio over 5 seeds: %.1fx", med);
    verdict(3, med >= 10.0, buf);
    CHECK(med >= 10.0);
}

TEST_CASE("criterion 4: more reservoir neurons never hurt at 80 km") {
    const std::vector<std::size_t> sizes = {50, 100, 200, 500};
    std::vector<TaskKey> keys;
    for (auto n : sizes)
        for (std::uint64_t s = 0; s < 5; ++s) keys.push_back({80.0, "1234", "esn", n, s});
    prefetch(keys);

    std::vector<double> med;
    for (auto n : sizes) {
        std::vector<double> bers;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto& r = record(80.0, "1234", "esn", n, s);
            REQUIRE(r.error.empty());
            bers.push_back(r.ber.ber);
        }
        med.push_back(median(bers));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < med.size(); ++i) monotone &= med[i] <= med[i - 1];
    char buf[160];
    std::snprintf(buf, sizeof(buf), "median ber N=50..500: %s %s %s %s", format_ber(med[0]).c_str(),
                  format_ber(med[1]).c_str(), format_ber(med[2]).c_str(),
                  format_ber(med[3]).c_str());
    verdict(4, monotone, buf);
    CHECK(monotone);
}

TEST_CASE("criterion 5: slice subsets beat one photodiode; all four win at 80 km") {
    std::vector<TaskKey> keys;
    for (std::uint64_t s = 0; s < 5; ++s) {
        keys.push_back({40.0, "bb", "esn", 500, s});
        keys.push_back({40.0, "23", "esn", 500, s});
        keys.push_back({40.0, "34", "esn", 500, s});
        keys.push_back({80.0, "23", "esn", 500, s});
        keys.push_back({80.0, "34", "esn", 500, s});
    }
    prefetch(keys);

    auto med_of = [&](double km, const std::string& sl) {
        std::vector<double> v;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto& r = record(km, sl, "esn", 500, s);
            REQUIRE(r.error.empty());
            v.push_back(r.ber.ber);
        }
        return median(v);
    };
    const double bb40 = med_of(40.0, "bb");
    const double s23 = med_of(40.0, "23");
    const double s34 = med_of(40.0, "34");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "40 km medians: 1-pd %s, slices23 %s, slices34 %s",
                  format_ber(bb40).c_str(), format_ber(s23).c_str(), format_ber(s34).c_str());
    verdict(5, s23 < bb40 && s34 < bb40, buf);
    CHECK(s23 < bb40);
    CHECK(s34 < bb40);

    const double full80 = med_of(80.0, "1234");  // cached by criterion 3
    const double s23_80 = med_of(80.0, "23");
    const double s34_80 = med_of(80.0, "34");
    std::snprintf(buf, sizeof(buf), "80 km medians: all four %s, slices23 %s, slices34 %s",
                  format_ber(full80).c_str(), format_ber(s23_80).c_str(),
                  format_ber(s34_80).c_str());
    verdict(5, full80 <= s23_80 && full80 <= s34_80, buf);
    CHECK(full80 <= s23_80);
    CHECK(full80 <= s34_80);
}

TEST_CASE("criterion 6: state update matches direct evaluation to 1e-12") {
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(8));
        const auto k = static_cast<Eigen::Index>(1 + rng.index(3));
        EsnModel m;
        m.params.leak_rate = rng.uniform(0.05, 1.0);
        m.params.n_neurons = static_cast<std::size_t>(n);
        m.n_inputs = static_cast<std::size_t>(k);
        m.w_in.resize(n, k + 1);
        for (Eigen::Index i = 0; i < m.w_in.size(); ++i) m.w_in.data()[i] = rng.uniform(-1.0, 1.0);
        Eigen::MatrixXd dense(n, n);
        for (Eigen::Index i = 0; i < dense.size(); ++i) dense.data()[i] = rng.uniform(-1.0, 1.0);
        m.w_res = dense.sparseView();
        m.state.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) m.state[i] = rng.uniform(-1.0, 1.0);
        Eigen::VectorXd u(k + 1);
        u[0] = 1.0;
        for (Eigen::Index i = 1; i <= k; ++i) u[i] = rng.uniform(-2.0, 2.0);
        const Eigen::VectorXd prev = m.state;
        esn_step(m, u);
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = m.w_in.row(i).dot(u);
            acc += dense.row(i).dot(prev);
            const double want =
                m.params.leak_rate * std::tanh(acc) + (1.0 - m.params.leak_rate) * prev[i];
            worst = std::max(worst, std::abs(m.state[i] - want));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "1000 random instances, worst deviation %.2e", worst);
    verdict(6, worst < 1e-12, buf);
    CHECK(worst < 1e-12);
}

TEST_CASE("criterion 7: oracle equivalences") {
    // dispersion composition and inverse within 1e-9 RMS
    Rng rng(5);
    std::vector<std::complex<double>> x(8192);
    for (auto& v : x) v = {rng.normal(), rng.normal()};
    const ComplexWaveform w(x, 256e9);
    FiberParams f30, f50, f80, inv;
    f30.length_km = 30;
    f50.length_km = 50;
    f80.length_km = 80;
    inv.length_km = 80;
    inv.dispersion_ps_nm_km = -17.0;
    f30.loss_db_per_km = f50.loss_db_per_km = f80.loss_db_per_km = inv.loss_db_per_km = 0.0;
    const auto split = propagate(propagate(w, f30), f50);
    const auto direct = propagate(w, f80);
    const auto undone = propagate(direct, inv);
    double comp = 0.0, undo = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        comp += std::norm(split.samples[i] - direct.samples[i]);
        undo += std::norm(undone.samples[i] - w.samples[i]);
    }
    comp = std::sqrt(comp / w.size());
    undo = std::sqrt(undo / w.size());
    verdict(7, comp < 1e-9 && undo < 1e-9, "dispersion composition and inverse within 1e-9 RMS");
    CHECK(comp < 1e-9);
    CHECK(undo < 1e-9);

    // LMS against the exact least-squares filter on the 2-tap toy channel
    {
        Rng srng(7);
        const std::size_t n_sym = 200000;
        std::vector<double> symbols(n_sym);
        for (auto& v : symbols) v = srng.bit() ? 1.0 : -1.0;
        std::vector<double> chan(n_sym * 2);
        for (std::size_t i = 0; i < n_sym; ++i) chan[2 * i] = chan[2 * i + 1] = symbols[i];
        std::vector<double> rx(chan.size(), 0.0);
        for (std::size_t i = 0; i < chan.size(); ++i) {
            rx[i] = chan[i];
            if (i >= 1) rx[i] += 0.5 * chan[i - 1];
        }
        Rng nrng(11);
        for (auto& v : rx) v += 0.1 * nrng.normal();

        FfeParams p;
        p.step_size = 1e-4;
        const auto res = ffe_train_apply(rx, symbols, p);
        const std::size_t from = 150000;
        Eigen::MatrixXd a(n_sym - from, 32);
        Eigen::VectorXd y(n_sym - from);
        for (std::size_t i = from; i < n_sym; ++i) {
            const std::size_t base = (i * 2 + rx.size() - 16) % rx.size();
            for (std::size_t k = 0; k < 32; ++k)
                a(i - from, static_cast<Eigen::Index>(k)) = rx[(base + k) % rx.size()];
            y[static_cast<Eigen::Index>(i - from)] = symbols[i];
        }
        const Eigen::VectorXd wopt = (a.transpose() * a).ldlt().solve(a.transpose() * y);
        const double mmse = (a * wopt - y).squaredNorm() / static_cast<double>(a.rows());
        double lms_sse = 0.0;
        for (std::size_t i = from; i < n_sym; ++i) {
            const double e = symbols[i] - res.soft[i];
            lms_sse += e * e;
        }
        const double lms_mse = lms_sse / static_cast<double>(n_sym - from);
        const double rel = std::abs(lms_mse / mmse - 1.0);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "LMS mse within %.2f%% of the 32-tap least squares", rel * 100);
        verdict(7, rel < 0.01, buf);
        CHECK(rel < 0.01);
    }

    // readout regression against the normal equations, and the bypass map
    {
        Rng crng(77);
        const unsigned sps = 8;
        std::vector<std::vector<double>> channels(1, std::vector<double>(500 * sps));
        for (auto& v : channels[0]) v = crng.normal();

        EsnParams p;
        p.n_neurons = 30;
        p.seed = 13;
        p.decision_delay_symbols = 0;
        p.ridge_lambda = 1e-3;  // well-conditioned comparison point
        auto m = esn_init(p, 1);
        std::vector<double> targets(400);
        Rng trng(5);
        for (auto& t : targets) t = trng.uniform(-1.0, 1.0);
        esn_train_readout(m, channels, targets, sps);

        auto oracle = esn_init(p, 1);
        const std::size_t skip = washout_symbols(sps);
        const std::size_t rows = targets.size() - skip;
        std::vector<Eigen::MatrixXd> a(sps, Eigen::MatrixXd(rows, 1 + 1 + 30));
        std::vector<Eigen::VectorXd> y(sps, Eigen::VectorXd(rows));
        Eigen::VectorXd u(2);
        for (std::size_t t = 0; t < targets.size() * sps; ++t) {
            u[0] = 1.0;
            u[1] = channels[0][t];
            esn_step(oracle, u);
            const std::size_t sym = t / sps;
            if (sym >= skip && sym < targets.size()) {
                const auto r = static_cast<Eigen::Index>(sym - skip);
                const std::size_t phase = t % sps;
                a[phase](r, 0) = 1.0;
                a[phase](r, 1) = u[1];
                a[phase].row(r).tail(30) = oracle.state;
                y[phase][r] = targets[sym];
            }
        }
        double best_mse = 1e300;
        Eigen::VectorXd wref;
        for (unsigned phase = 0; phase < sps; ++phase) {
            Eigen::MatrixXd gram = a[phase].transpose() * a[phase];
            gram.diagonal().array() += p.ridge_lambda;
            const Eigen::VectorXd w = gram.ldlt().solve(a[phase].transpose() * y[phase]);
            const double mse = (a[phase] * w - y[phase]).squaredNorm() / static_cast<double>(rows);
            if (mse < best_mse) {
                best_mse = mse;
                wref = w;
            }
        }
        const double dev = (wref - m.w_out).cwiseAbs().maxCoeff();
        verdict(7, dev < 1e-8, "readout equals the normal-equations solution within 1e-8");
        CHECK(dev < 1e-8);

        // dead reservoir: plain affine regression recovers (3, 2)
        EsnModel bypass;
        bypass.params = p;
        bypass.params.n_neurons = 1;
        bypass.params.ridge_lambda = 0.0;
        bypass.n_inputs = 1;
        bypass.w_in = Eigen::MatrixXd::Zero(1, 2);
        bypass.w_res.resize(1, 1);
        bypass.state = Eigen::VectorXd::Zero(1);
        std::vector<double> affine(400);
        for (std::size_t i = 0; i < affine.size(); ++i) affine[i] = 3.0 * channels[0][i * sps] + 2.0;
        esn_train_readout(bypass, channels, affine, sps);
        const bool affine_ok = std::abs(bypass.w_out[0] - 2.0) < 1e-8 &&
                               std::abs(bypass.w_out[1] - 3.0) < 1e-8;
        verdict(7, affine_ok, "bypass regression recovers the (3, 2) affine map within 1e-8");
        CHECK(affine_ok);
    }
}

TEST_CASE("criterion 8: statistics and end-to-end determinism") {
    // exact constructed rate
    std::vector<std::uint8_t> truth(200000, 0), dec(200000, 0);
    for (std::size_t i = 0; i < 45; ++i) dec[i * 4000] = 1;
    const auto r = count_ber(dec, truth);
    const bool exact = r.errors == 45 && r.ber == 45.0 / 200000.0 && !r.below_kp4 &&
                       format_ber(r.ber) == "2.25e-4";
    verdict(8, exact, "45/200000 reproduces 2.25e-4 exactly and prints as 2.25e-4");
    CHECK(exact);

    // Wilson coverage on synthetic Bernoulli trials
    Rng rng(9);
    std::size_t covered = 0;
    const double p = 2e-4;
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint64_t k = 0;
        for (std::size_t i = 0; i < 200000; ++i) k += rng.uniform01() < p;
        double lo, hi;
        wilson_interval(k, 200000, lo, hi);
        covered += (p >= lo && p <= hi);
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "Wilson 95%% interval covered the truth in %zu/1000 trials",
                  covered);
    verdict(8, covered >= 930, buf);
    CHECK(covered >= 930);

    // two CLI runs of the reservoir-size study with 8 jobs, byte-identical
    // bodies (the wall-clock column is the one nondeterministic field)
    const std::string cli = SLICERX_CLI_PATH;
    const std::string out1 = "acceptance_fig3c_a.csv";
    const std::string out2 = "acceptance_fig3c_b.csv";
    const int rc1 = std::system((cli + " fig3c --jobs 8 --out " + out1 + " > /dev/null").c_str());
    const int rc2 = std::system((cli + " fig3c --jobs 8 --out " + out2 + " > /dev/null").c_str());
    REQUIRE(rc1 == 0);
    REQUIRE(rc2 == 0);
    std::ifstream f1(out1), f2(out2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    const bool identical = strip_wall_column(s1.str()) == strip_wall_column(s2.str()) &&
                           s1.str().size() > 1000;
    verdict(8, identical, "fig3c with 8 jobs is byte-identical across runs (wall column aside)");
    CHECK(identical);
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("criterion 9: the whole suite fits the desk-scale time budget") {
    const double t = elapsed_s();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "acceptance suite wall time %.0f s (budget 900 s)", t);
    verdict(9, t <= 900.0, buf);
    CHECK(t <= 900.0);
}
