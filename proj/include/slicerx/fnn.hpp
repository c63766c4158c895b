#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "slicerx/equalizer.hpp"

namespace slicerx {

struct FnnParams {
    std::size_t hidden_neurons = 32;
    unsigned window_symbols = 5;  // per photodiode
    unsigned sps = 8;
    double train_fraction = 0.05;
    std::size_t max_epochs = 100;
    double mse_improve_tol = 1e-6;
    std::uint64_t seed = 1;
};

/// Sliding-window sample matrix. Row r holds, for each photodiode in turn, the
/// window_symbols * sps samples centered on symbol first_symbol + r; rows
/// advance one symbol at a time and edge symbols without a full window are
/// dropped.
struct FeatureMatrix {
    Eigen::MatrixXd rows;
    std::size_t first_symbol = 0;
};

FeatureMatrix fnn_window_features(const std::vector<std::vector<double>>& channels, unsigned sps,
                                  unsigned window_symbols);

/// Two-layer net: tanh hidden layer, single linear output.
struct FnnModel {
    Eigen::MatrixXd w1;  // hidden x inputs
    Eigen::VectorXd b1;  // hidden
    Eigen::VectorXd w2;  // hidden
    double b2 = 0.0;

    std::size_t n_params() const {
        return static_cast<std::size_t>(w1.size() + b1.size() + w2.size()) + 1;
    }
};

/// Full-batch Levenberg-Marquardt on the sum of squared residuals. Damping
/// starts at 1e-3, grows 10x on a rejected step and shrinks 10x on an accepted
/// one. Stops at max_epochs or when the MSE improves by less than the
/// tolerance. Throws TrainingError if the damped normal system stays singular.
TrainReport fnn_train(FnnModel& m, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      const FnnParams& p);

Eigen::VectorXd fnn_infer(const FnnModel& m, const Eigen::MatrixXd& features);

class FnnEqualizer final : public Equalizer {
public:
    explicit FnnEqualizer(FnnParams params = {}) : params_(params) {}
    FnnEqualizer(FnnParams params, FnnModel model) : params_(params), model_(std::move(model)) {}

    TrainReport train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                      unsigned sps) override;
    SoftSymbols equalize(const DetectedChannels& rx, unsigned sps) const override;
    std::string name() const override { return "fnn"; }
    void save(std::ostream& os) const override;

    const FnnModel& model() const { return model_; }

private:
    FnnParams params_;
    FnnModel model_;
};

}  // namespace slicerx
