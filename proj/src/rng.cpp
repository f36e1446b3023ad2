#include "trackfuse/rng.hpp"

#include <cmath>

namespace trackfuse {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t run, std::uint64_t sensor, std::uint64_t scan,
                         RngPurpose purpose) {
    std::uint64_t state = seed;
    std::uint64_t key = splitmix64(state);
    for (std::uint64_t part : {run, sensor, scan, static_cast<std::uint64_t>(purpose)}) {
        state ^= part + 0x632BE59BD9B4E019ULL + (key << 6) + (key >> 2);
        key = splitmix64(state);
    }
    return key;
}

Rng make_rng(std::uint64_t seed, std::uint64_t run, std::uint64_t sensor, std::uint64_t scan, RngPurpose purpose) {
    std::uint64_t state = stream_key(seed, run, sensor, scan, purpose);
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
    return Rng(seq);
}

double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

std::uint64_t poisson(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

}  // namespace trackfuse
