#pragma once

#include <cstdint>
#include <random>

namespace cbf_teleop {

/// Portable seeded generator. std::mt19937_64 has a fully specified output
/// sequence; the conversion to doubles is done here rather than through
/// <random> distributions, whose algorithms differ between standard
/// libraries. uniform01 takes the top 53 bits: k * 2^-53, k in [0, 2^53).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace cbf_teleop
