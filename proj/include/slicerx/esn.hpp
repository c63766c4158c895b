#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>

#include "slicerx/equalizer.hpp"

namespace slicerx {

struct EsnParams {
    std::size_t n_neurons = 500;
    double leak_rate = 0.9;
    double sparsity = 0.98;  // fraction of zero reservoir weights
    double input_scale = 0.1;
    std::uint64_t seed = 1;
    double ridge_lambda = 1e-8;
    /// Reservoir weights are rescaled to this spectral radius after the draw;
    /// 0 keeps the raw N(0,1) nonzeros. Raw reservoirs stop forgetting their
    /// initial state once sqrt(0.02 N) crosses ~2, so sizes beyond ~200
    /// neurons need the rescale.
    double spectral_radius = 0.95;
    /// The readout for symbol i is taken at the center of symbol
    /// i + decision_delay_symbols, so the causal state has absorbed the
    /// trailing half of the dispersion-spread pulse (the windowed equalizer
    /// gets the same lookahead from its centered window).
    std::size_t decision_delay_symbols = 3;
};

/// Echo-state network: fixed random input and reservoir weights, trained
/// linear readout over [1; inputs; state].
struct EsnModel {
    EsnParams params;
    std::size_t n_inputs = 0;
    Eigen::MatrixXd w_in;                                 // N x (n_inputs + 1); column 0 drives the bias
    Eigen::SparseMatrix<double, Eigen::RowMajor> w_res;   // N x N
    Eigen::VectorXd w_out;                                // 1 + n_inputs + N once trained
    unsigned readout_phase = 0;                           // within-symbol sample the readout strikes
    Eigen::VectorXd state;                                // N

    bool trained() const { return w_out.size() > 0; }
    void reset_state() { state.setZero(); }
};

/// Draws the fixed weights: w_in ~ U(-1,1) * input_scale, w_res with exactly
/// ceil((1 - sparsity) * N^2) nonzeros ~ N(0,1). Candidates whose state does
/// not forget its initial condition under a driven probe are redrawn, up to
/// 10 attempts. Deterministic per seed.
EsnModel esn_init(const EsnParams& p, std::size_t n_inputs);

/// One state update:
/// state <- leak * tanh(w_in * u + w_res * state) + (1 - leak) * state,
/// with u = [1, inputs...].
void esn_step(EsnModel& m, const Eigen::VectorXd& u_with_bias);

/// Fits the readout by ridge regression (plain least squares when lambda = 0)
/// on rows [1; u; state] taken at symbol-center samples of the training
/// prefix, washout excluded. Targets are the +-1 mapped OOK amplitudes.
TrainReport esn_train_readout(EsnModel& m, const std::vector<std::vector<double>>& channels,
                              std::span<const double> targets, unsigned sps);

/// Runs the reservoir over the full record from a zero state and returns the
/// readout at every symbol center.
std::vector<double> esn_equalize(EsnModel& m, const std::vector<std::vector<double>>& channels,
                                 unsigned sps);

class EsnEqualizer final : public Equalizer {
public:
    explicit EsnEqualizer(EsnParams params) : params_(params) {}
    explicit EsnEqualizer(EsnModel model) : params_(model.params), model_(std::move(model)) {}

    TrainReport train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                      unsigned sps) override;
    SoftSymbols equalize(const DetectedChannels& rx, unsigned sps) const override;
    std::string name() const override { return "esn"; }
    void save(std::ostream& os) const override;

    const EsnModel& model() const { return model_; }

private:
    EsnParams params_;
    mutable EsnModel model_;  // state scratch; weights stay fixed after train
};

}  // namespace slicerx
