#include "slicerx/ffe.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicerx/sigkit.hpp"

namespace slicerx {

namespace {

/// Window of p.n_taps samples centered on symbol i (circular indexing).
inline void fill_window(std::span<const double> x, std::size_t i, const FfeParams& p,
                        Eigen::VectorXd& w) {
    const std::size_t n = x.size();
    const std::size_t half = p.n_taps / 2;
    const std::size_t base = (i * p.sps + n - half) % n;
    for (std::size_t k = 0; k < p.n_taps; ++k) w[static_cast<Eigen::Index>(k)] = x[(base + k) % n];
}

}  // namespace

FfeResult ffe_train_apply(std::span<const double> samples_2sps, std::span<const double> targets,
                          const FfeParams& p) {
    if (p.n_taps == 0 || p.step_size <= 0.0) throw std::invalid_argument("ffe: bad parameters");
    const std::size_t n_symbols = samples_2sps.size() / p.sps;
    if (targets.empty() || targets.size() > n_symbols)
        throw std::invalid_argument("ffe: training prefix longer than the record");

    const std::size_t skip = washout_symbols(p.sps);
    if (targets.size() <= skip)
        throw std::invalid_argument("ffe: training prefix does not outlast the washout");
    const std::size_t block = 256;

    double mu = p.step_size;
    Eigen::VectorXd taps;
    double train_mse = 0.0;
    bool ok = false;
    int attempt = 0;
    for (; attempt < 4 && !ok; ++attempt) {
        taps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_taps));
        Eigen::VectorXd window(static_cast<Eigen::Index>(p.n_taps));
        double first_block_mse = -1.0;
        double acc = 0.0;
        std::size_t acc_n = 0, total_n = 0;
        double total_acc = 0.0;
        ok = true;
        for (std::size_t i = skip; i < targets.size(); ++i) {
            fill_window(samples_2sps, i, p, window);
            const double y = taps.dot(window);
            const double e = targets[i] - y;
            taps += mu * e * window;
            acc += e * e;
            total_acc += e * e;
            ++acc_n;
            ++total_n;
            if (acc_n == block) {
                const double block_mse = acc / static_cast<double>(acc_n);
                if (first_block_mse < 0.0) first_block_mse = block_mse;
                if (!std::isfinite(block_mse) || block_mse > 10.0 * first_block_mse) {
                    ok = false;
                    break;
                }
                acc = 0.0;
                acc_n = 0;
            }
        }
        if (ok) train_mse = total_n ? total_acc / static_cast<double>(total_n) : 0.0;
        if (!ok) mu *= 0.5;
    }
    if (!ok) throw TrainingError("ffe: LMS diverged after three step-size retries");

    FfeResult res;
    res.taps = taps;
    res.report.train_mse = train_mse;
    res.report.n_train_samples = targets.size() > skip ? targets.size() - skip : 0;
    res.report.iterations = res.report.n_train_samples;
    res.report.converged = attempt == 1;  // no retries needed

    res.soft.resize(n_symbols);
    Eigen::VectorXd window(static_cast<Eigen::Index>(p.n_taps));
    for (std::size_t i = 0; i < n_symbols; ++i) {
        fill_window(samples_2sps, i, p, window);
        res.soft[i] = taps.dot(window);
    }
    return res;
}

std::vector<double> FfeEqualizer::prepare(const DetectedChannels& rx, unsigned sps) const {
    const auto std_channels = standardize_channels(rx);
    std::vector<double> sum(std_channels.front().size(), 0.0);
    for (const auto& ch : std_channels)
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += ch[i];

    if (sps == params_.sps) return sum;
    // resample symbol-synchronously down to the equalizer rate
    ComplexWaveform w(std::vector<std::complex<double>>(sum.begin(), sum.end()),
                      static_cast<double>(sps));
    auto r = resample(w, static_cast<double>(params_.sps));
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = r.samples[i].real();
    return out;
}

TrainReport FfeEqualizer::train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                                unsigned sps) {
    const auto x = prepare(rx, sps);
    std::vector<double> targets(train_amplitudes.size());
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = 2.0 * train_amplitudes[i] - 1.0;
    auto res = ffe_train_apply(x, targets, params_);
    taps_ = std::move(res.taps);
    return res.report;
}

SoftSymbols FfeEqualizer::equalize(const DetectedChannels& rx, unsigned sps) const {
    if (taps_.size() == 0) throw std::logic_error("ffe: not trained");
    const auto x = prepare(rx, sps);
    const std::size_t n_symbols = x.size() / params_.sps;
    SoftSymbols out;
    out.values.resize(n_symbols);
    Eigen::VectorXd window(taps_.size());
    FfeParams p = params_;
    for (std::size_t i = 0; i < n_symbols; ++i) {
        fill_window(x, i, p, window);
        out.values[i] = taps_.dot(window);
    }
    return out;
}

}  // namespace slicerx
