#pragma once

#include <Eigen/Dense>

#include "slicerx/equalizer.hpp"

namespace slicerx {

struct FfeParams {
    std::size_t n_taps = 32;
    double step_size = 2e-3;  // LMS mu
    unsigned sps = 2;         // fractionally spaced, T/2
};

struct FfeResult {
    std::vector<double> soft;  // one estimate per symbol
    Eigen::VectorXd taps;
    TrainReport report;
};

/// T/2-spaced LMS feedforward equalizer. Taps adapt once per symbol against
/// the known targets over the training prefix, then freeze; the frozen filter
/// produces every symbol estimate. Diverging runs retry with the step halved,
/// three times, before giving up.
FfeResult ffe_train_apply(std::span<const double> samples_2sps, std::span<const double> targets,
                          const FfeParams& p);

class FfeEqualizer final : public Equalizer {
public:
    explicit FfeEqualizer(FfeParams params = {}) : params_(params) {}
    FfeEqualizer(FfeParams params, Eigen::VectorXd taps)
        : params_(params), taps_(std::move(taps)) {}

    TrainReport train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                      unsigned sps) override;
    SoftSymbols equalize(const DetectedChannels& rx, unsigned sps) const override;
    std::string name() const override { return "ffe"; }
    void save(std::ostream& os) const override;

    const Eigen::VectorXd& taps() const { return taps_; }
    const FfeParams& params() const { return params_; }

private:
    /// Channels summed into one electrical signal, resampled to the equalizer
    /// rate and standardized. A single photodiode maps through unchanged.
    std::vector<double> prepare(const DetectedChannels& rx, unsigned sps) const;

    FfeParams params_;
    Eigen::VectorXd taps_;
};

}  // namespace slicerx
