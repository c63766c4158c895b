#include "slicerx/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace slicerx {

void wilson_interval(std::uint64_t errors, std::uint64_t n, double& lo, double& hi) {
    if (n == 0) {
        lo = hi = 0.0;
        return;
    }
    const double z = 1.959963984540054;  // two-sided 95%
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(errors) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

std::vector<std::uint8_t> hard_decide(std::span<const double> soft,
                                      std::span<const double> training_soft,
                                      std::span<const std::uint8_t> training_bits) {
    if (training_soft.size() != training_bits.size() || training_soft.empty())
        throw std::invalid_argument("hard_decide: training soft/bit size mismatch");
    double sum0 = 0.0, sum1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < training_soft.size(); ++i) {
        if (training_bits[i]) {
            sum1 += training_soft[i];
            ++n1;
        } else {
            sum0 += training_soft[i];
            ++n0;
        }
    }
    if (n0 == 0 || n1 == 0)
        throw std::invalid_argument("hard_decide: training data contains a single class");
    const double mean0 = sum0 / static_cast<double>(n0);
    const double mean1 = sum1 / static_cast<double>(n1);
    const double threshold = 0.5 * (mean0 + mean1);
    const bool one_is_high = mean1 >= mean0;

    std::vector<std::uint8_t> out(soft.size());
    for (std::size_t i = 0; i < soft.size(); ++i) {
        const bool high = soft[i] > threshold;
        out[i] = static_cast<std::uint8_t>(high == one_is_high);
    }
    return out;
}

BerResult count_ber(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> truth,
                    std::size_t skip) {
    if (decisions.size() != truth.size())
        throw std::invalid_argument("count_ber: length mismatch");
    if (skip >= decisions.size())
        throw std::invalid_argument("count_ber: skip leaves no symbols");
    BerResult r;
    for (std::size_t i = skip; i < decisions.size(); ++i) {
        r.errors += decisions[i] != truth[i];
        ++r.bits;
    }
    r.ber = static_cast<double>(r.errors) / static_cast<double>(r.bits);
    wilson_interval(r.errors, r.bits, r.ci95_low, r.ci95_high);
    r.below_kp4 = r.ber < kKp4BerThreshold;
    return r;
}

}  // namespace slicerx
