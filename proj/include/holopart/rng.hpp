#pragma once

#include <cmath>
#include <cstdint>

#include "holopart/fft.hpp"

// Deterministic seeding: every stream is SplitMix64 keyed by
// mix(global_seed, module_tag, index), so any sub-computation can be
// reproduced in isolation and results never depend on scheduling.

namespace holopart {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }
};

inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    SplitMix64 s(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
    return s.next();
}

inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return seed_mix(seed_mix(a, b), c);
}

namespace seed_tag {
inline constexpr std::uint64_t path = 0x70617468ULL;       // per-path increments
inline constexpr std::uint64_t refine = 0x7265666EULL;     // per-step refinement draws
inline constexpr std::uint64_t exit_hop = 0x65786974ULL;   // harmonic-measure exit draw
inline constexpr std::uint64_t witness = 0x7769746EULL;    // witness families
inline constexpr std::uint64_t preset = 0x70726573ULL;     // density presets
}  // namespace seed_tag

struct Gauss2 {
    double a = 0.0, b = 0.0;
};

inline Gauss2 gaussian_pair(SplitMix64& r) {
    const double u1 = r.uniform_pos();
    const double u2 = r.uniform01();
    const double m = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * fft::kPi * u2;
    return {m * std::cos(ang), m * std::sin(ang)};
}

}  // namespace holopart
