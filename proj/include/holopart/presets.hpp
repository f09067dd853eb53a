#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "holopart/circle.hpp"
#include "holopart/rng.hpp"

// Named density presets. Every preset is floored and normalized to unit
// mean; randomness flows from an explicit seed.

namespace holopart::presets {

inline Density uniform(const CircleGrid& g) { return Density::uniform(g); }

namespace detail {

// smooth cos^2 bump of unit height supported on |theta - center| < halfwidth
inline double bump(double theta, double center, double halfwidth) {
    double d = std::remainder(theta - center, kTwoPi);
    if (std::abs(d) >= halfwidth) return 0.0;
    const double c = std::cos(0.5 * kPi * d / halfwidth);
    return c * c;
}

}  // namespace detail

inline Density two_arc(const CircleGrid& g) {
    std::vector<double> w(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double t = g.angle(k);
        w[k] = 0.05 + 6.0 * detail::bump(t, 0.8, 0.55) + 2.5 * detail::bump(t, 3.6, 0.95);
    }
    return Density::from_samples(g, std::move(w));
}

// |1 - e^{i theta}|^a with a in (-1/2, 1/2); the singular sample at theta=0
// takes the half-cell value.
inline Density power_spike(const CircleGrid& g, double a) {
    if (!(a > -0.5 && a < 0.5)) throw std::invalid_argument("power_spike: a must lie in (-1/2, 1/2)");
    std::vector<double> w(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        double t = g.angle(k);
        if (k == 0) t = 0.5 * g.cell();
        w[k] = std::pow(2.0 * std::abs(std::sin(0.5 * t)), a);
    }
    return Density::from_samples(g, std::move(w));
}

inline Density random_trig(const CircleGrid& g, std::uint64_t seed, unsigned degree = 24, double lo = 0.2,
                           double hi = 5.0) {
    SplitMix64 rng(seed_mix(seed, seed_tag::preset));
    std::vector<double> u(g.n, 0.0);
    for (unsigned k = 1; k <= degree; ++k) {
        const Gauss2 gp = gaussian_pair(rng);
        const double damp = 1.0 / (1.0 + 0.15 * static_cast<double>(k));
        for (std::size_t j = 0; j < g.n; ++j)
            u[j] += damp * (gp.a * std::cos(k * g.angle(j)) + gp.b * std::sin(k * g.angle(j)));
    }
    double mn = u[0], mx = u[0];
    for (double x : u) {
        mn = std::min(mn, x);
        mx = std::max(mx, x);
    }
    const double span = std::max(mx - mn, 1e-12);
    for (double& x : u) x = lo + (hi - lo) * (x - mn) / span;
    return Density::from_samples(g, std::move(u));
}

struct NamedDensity {
    std::string name;
    Density density;
};

// the standard density suite used by calibration and acceptance runs
inline std::vector<NamedDensity> standard_suite(const CircleGrid& g, std::uint64_t seed) {
    std::vector<NamedDensity> out;
    out.push_back({"uniform", uniform(g)});
    out.push_back({"two-arc", two_arc(g)});
    out.push_back({"power-spike(-0.25)", power_spike(g, -0.25)});
    out.push_back({"random-trig", random_trig(g, seed)});
    return out;
}

inline Density by_name(const CircleGrid& g, const std::string& name, std::uint64_t seed, double param = 0.0) {
    if (name == "uniform") return uniform(g);
    if (name == "two-arc") return two_arc(g);
    if (name == "power-spike") return power_spike(g, param);
    if (name == "random-trig") return random_trig(g, seed);
    throw std::invalid_argument("unknown density preset: " + name);
}

}  // namespace holopart::presets
