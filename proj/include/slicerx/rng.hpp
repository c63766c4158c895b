#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace slicerx {

/// splitmix64 finalizer; also used to derive independent sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

enum class SeedTag : std::uint64_t {
    Bits = 1,       // transmitted data
    Noise = 2,      // amplifier noise
    Reservoir = 3,  // reservoir weight draws
    NetInit = 4,    // feedforward net initialization
    Probe = 5,      // reservoir stability probe inputs
};

inline std::uint64_t derive_seed(std::uint64_t base, SeedTag tag) {
    return splitmix64(base ^ (0xd1b54a32d192ed03ull * static_cast<std::uint64_t>(tag)));
}

/// Counter-based generator (splitmix64 stream). Self-contained so sequences do
/// not depend on standard-library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_++); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint8_t bit() { return static_cast<std::uint8_t>(next_u64() >> 63); }

    /// Uniform index in [0, n). Lemire multiply-shift; bias is < 2^-53 for the
    /// n used here and sequences stay one-draw-per-call.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (pairwise, cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace slicerx
