#pragma once

#include <cstdint>
#include <random>

namespace trackfuse {

enum class RngPurpose : std::uint64_t {
    Truth = 1,
    TargetInit = 2,
    SensorParams = 3,
    Detection = 4,
    MeasurementNoise = 5,
    Clutter = 6,
    Fusion = 7,
    Test = 8,
};

/// One splitmix64 step.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes (seed, run, sensor, scan, purpose) into a 64-bit key. Distinct tuples give
/// independent streams, so the same draw is reproduced regardless of call order.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t run, std::uint64_t sensor, std::uint64_t scan,
                         RngPurpose purpose);

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t run, std::uint64_t sensor, std::uint64_t scan, RngPurpose purpose);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
std::uint64_t poisson(Rng& rng, double mean);

}  // namespace trackfuse
