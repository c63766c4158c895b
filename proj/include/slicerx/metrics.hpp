#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace slicerx {

/// Pre-FEC BER limit of the KP4 hard-decision code.
inline constexpr double kKp4BerThreshold = 2.24e-4;

struct BerResult {
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    bool below_kp4 = false;
};

/// Wilson 95% score interval for errors/n.
void wilson_interval(std::uint64_t errors, std::uint64_t n, double& lo, double& hi);

/// Threshold decisions. The threshold is the midpoint of the class-conditional
/// means of the training soft values, so it is invariant to affine scaling of
/// the equalizer output. Both training classes must be present.
std::vector<std::uint8_t> hard_decide(std::span<const double> soft,
                                      std::span<const double> training_soft,
                                      std::span<const std::uint8_t> training_bits);

/// Exact error count over positions >= skip, Wilson CI, KP4 classification.
BerResult count_ber(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> truth,
                    std::size_t skip = 0);

}  // namespace slicerx
