#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicerx/frontend.hpp"

namespace slicerx {

/// Leading samples excluded from equalizer training and from error counting.
inline constexpr std::size_t kWashoutSamples = 1000;

inline std::size_t washout_symbols(unsigned sps) {
    return (kWashoutSamples + sps - 1) / sps;
}

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainReport {
    double train_mse = 0.0;
    std::size_t n_train_samples = 0;
    bool converged = true;
    std::size_t iterations = 0;
    bool used_min_norm = false;  // rank-deficient readout fell back to min-norm
};

/// Soft symbol estimates; values[i] belongs to transmit symbol first_symbol+i.
struct SoftSymbols {
    std::vector<double> values;
    std::size_t first_symbol = 0;
};

/// Per-channel zero-mean unit-variance copy. Equalizers always see
/// standardized channels so their operating point does not depend on the
/// absolute electrical scale.
std::vector<std::vector<double>> standardize_channels(const DetectedChannels& rx);

/// Common face of the three trainable equalizers. train() consumes the known
/// OOK amplitudes of the leading training symbols; equalize() runs the frozen
/// model over the whole record.
class Equalizer {
public:
    virtual ~Equalizer() = default;
    virtual TrainReport train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                              unsigned sps) = 0;
    virtual SoftSymbols equalize(const DetectedChannels& rx, unsigned sps) const = 0;
    virtual std::string name() const = 0;
    virtual void save(std::ostream& os) const = 0;
};

/// Reads back an equalizer written by save(). Binary blob: magic "EQLZ",
/// u32 version, u32 kind tag, then kind-specific dimensions and f64 weights,
/// little-endian.
std::unique_ptr<Equalizer> load_equalizer(std::istream& is);

}  // namespace slicerx
