#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "slicerx/ffe.hpp"
#include "slicerx/metrics.hpp"
#include "slicerx/rng.hpp"

using namespace slicerx;

namespace {

std::vector<double> pm1_symbols(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> s(n);
    for (auto& v : s) v = rng.bit() ? 1.0 : -1.0;
    return s;
}

/// Zero-order-hold upsample to 2 sps, apply a T/2-spaced channel, add noise.
std::vector<double> toy_channel(const std::vector<double>& symbols,
                                const std::vector<double>& h, double noise_sigma,
                                std::uint64_t seed) {
    std::vector<double> x(symbols.size() * 2);
    for (std::size_t i = 0; i < symbols.size(); ++i) x[2 * i] = x[2 * i + 1] = symbols[i];
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n)
        for (std::size_t k = 0; k < h.size() && k <= n; ++k) y[n] += h[k] * x[n - k];
    Rng rng(seed);
    if (noise_sigma > 0.0)
        for (auto& v : y) v += noise_sigma * rng.normal();
    return y;
}

/// Exact least-squares 32-tap symbol-decision filter on the given record.
double wiener_mmse(const std::vector<double>& x, const std::vector<double>& targets,
                   std::size_t from, std::size_t to, const FfeParams& p) {
    const std::size_t n = x.size();
    const std::size_t rows = to - from;
    Eigen::MatrixXd a(rows, p.n_taps);
    Eigen::VectorXd y(rows);
    for (std::size_t i = from; i < to; ++i) {
        const std::size_t base = (i * p.sps + n - p.n_taps / 2) % n;
        for (std::size_t k = 0; k < p.n_taps; ++k)
            a(i - from, static_cast<Eigen::Index>(k)) = x[(base + k) % n];
        y[static_cast<Eigen::Index>(i - from)] = targets[i];
    }
    const Eigen::VectorXd w = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    return (a * w - y).squaredNorm() / static_cast<double>(rows);
}

}  // namespace

TEST_CASE("identity channel, noiseless: unit center tap and zero errors") {
    // white +-1 samples, target = the center sample (spec's identity setup)
    Rng rng(3);
    std::vector<double> x(40000);
    for (auto& v : x) v = rng.bit() ? 1.0 : -1.0;
    std::vector<double> targets(x.size() / 2);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = x[2 * i];

    FfeParams p;
    p.step_size = 1e-3;
    const auto res = ffe_train_apply(x, targets, p);

    // converged taps approximate the unit center tap
    for (std::size_t k = 0; k < p.n_taps; ++k) {
        const double want = k == p.n_taps / 2 ? 1.0 : 0.0;
        CHECK(std::abs(res.taps[static_cast<Eigen::Index>(k)] - want) < 0.01);
    }

    // zero decision errors over the whole record
    std::size_t errors = 0;
    for (std::size_t i = 0; i < targets.size(); ++i)
        errors += (res.soft[i] > 0.0) != (targets[i] > 0.0);
    CHECK(errors == 0);
    CHECK(res.report.converged);
    CHECK(res.report.train_mse < 0.05);
}

TEST_CASE("LMS converges in mean to the Wiener solution") {
    // noiseless stationary toy: tap error < 1% after 1e4 symbols at mu = 1e-3
    Rng rng(5);
    std::vector<double> x(2 * 10500);
    for (auto& v : x) v = rng.bit() ? 1.0 : -1.0;
    std::vector<double> targets(10500);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = x[2 * i];

    FfeParams p;
    p.step_size = 1e-3;
    const auto res = ffe_train_apply(x, targets, p);
    Eigen::VectorXd wiener = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_taps));
    wiener[static_cast<Eigen::Index>(p.n_taps / 2)] = 1.0;
    CHECK((res.taps - wiener).norm() / wiener.norm() < 0.01);
}

TEST_CASE("two-tap channel: converged MSE within 1% of the 32-tap Wiener MMSE") {
    const std::size_t n_sym = 200000;
    const auto symbols = pm1_symbols(n_sym, 7);
    const auto x = toy_channel(symbols, {1.0, 0.5}, 0.1, 11);

    FfeParams p;
    p.step_size = 1e-4;  // small step: misadjustment well under the 1% budget
    const auto res = ffe_train_apply(x, symbols, p);

    // measure both filters on the converged tail
    const std::size_t from = 150000, to = n_sym;
    const double mmse = wiener_mmse(x, symbols, from, to, p);
    double lms_sse = 0.0;
    for (std::size_t i = from; i < to; ++i) {
        const double e = symbols[i] - res.soft[i];
        lms_sse += e * e;
    }
    const double lms_mse = lms_sse / static_cast<double>(to - from);
    CHECK(lms_mse == doctest::Approx(mmse).epsilon(0.01));
    CHECK(res.taps.size() == 32);  // tap count per configuration
}

TEST_CASE("divergence retries halve the step then give up") {
    Rng rng(9);
    std::vector<double> x(20000);
    for (auto& v : x) v = 20.0 * rng.normal();  // hot input, mu far too large
    std::vector<double> targets(x.size() / 2);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = x[2 * i];

    FfeParams p;
    p.step_size = 0.4;
    // with three halvings 0.4 -> 0.05 is still unstable at this input power
    CHECK_THROWS_AS(ffe_train_apply(x, targets, p), TrainingError);

    FfeParams ok = p;
    ok.step_size = 1e-5;  // stable for the 20x-hot input
    const auto res = ffe_train_apply(x, targets, ok);
    CHECK(res.report.converged);
}

TEST_CASE("equalizer interface: multi-channel sum, resample to 2 sps, blob round trip") {
    // two channels at 8 sps whose sum carries the symbol pattern
    const std::size_t n_sym = 10000;  // prefix must outlast the 2 sps washout
    const unsigned sps = 8;
    const auto symbols = pm1_symbols(n_sym, 13);
    DetectedChannels rx;
    rx.sample_rate = 256e9;
    rx.channels.assign(2, std::vector<double>(n_sym * sps));
    Rng rng(17);
    for (std::size_t i = 0; i < n_sym; ++i)
        for (unsigned s = 0; s < sps; ++s) {
            const double v = symbols[i] + 0.02 * rng.normal();
            rx.channels[0][i * sps + s] = 0.5 * v + 1.0;
            rx.channels[1][i * sps + s] = 0.5 * v - 1.0;
        }

    std::vector<double> amps(n_sym / 10);
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = symbols[i] > 0 ? 1.0 : 0.0;

    FfeEqualizer eq;
    const auto rep = eq.train(rx, amps, sps);
    CHECK(rep.converged);
    const auto soft = eq.equalize(rx, sps);
    REQUIRE(soft.values.size() == n_sym);

    std::vector<std::uint8_t> truth(n_sym), dec(n_sym);
    for (std::size_t i = 0; i < n_sym; ++i) {
        truth[i] = symbols[i] > 0;
        dec[i] = soft.values[i] > 0;
    }
    CHECK(count_ber(dec, truth, 1000).ber == 0.0);

    // a prefix shorter than the washout is an error, not a silent no-op
    FfeEqualizer fresh;
    CHECK_THROWS_AS(fresh.train(rx, std::span<const double>(amps.data(), 300), sps),
                    std::invalid_argument);

    std::stringstream blob;
    eq.save(blob);
    const auto loaded = load_equalizer(blob);
    CHECK(loaded->name() == "ffe");
    const auto soft2 = loaded->equalize(rx, sps);
    for (std::size_t i = 0; i < n_sym; i += 37) CHECK(soft2.values[i] == soft.values[i]);
}
