#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "holopart/circle.hpp"

namespace holopart {

// Kolmogorov-Smirnov statistic against the uniform law on [0, 2*pi).
inline double ks_statistic_uniform_angle(std::vector<double> angles) {
    std::sort(angles.begin(), angles.end());
    const double n = static_cast<double>(angles.size());
    double d = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double u = angles[i] / kTwoPi;
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(u - lo, hi - u));
    }
    return d;
}

// Asymptotic KS critical value at significance alpha: c(alpha)/sqrt(n),
// c(0.01) = 1.628.
inline double ks_critical(double alpha, std::size_t n) {
    double c;
    if (alpha <= 0.011)
        c = 1.628;
    else if (alpha <= 0.051)
        c = 1.358;
    else
        c = 1.224;
    return c / std::sqrt(static_cast<double>(n));
}

// Poisson kernel of the unit disc at z = r e^{i*phi}, normalized to total
// mass one over theta in [0, 2*pi).
inline double poisson_kernel(double r, double phi, double theta) {
    const double num = 1.0 - r * r;
    const double den = 1.0 - 2.0 * r * std::cos(theta - phi) + r * r;
    return num / (kTwoPi * den);
}

// Pearson chi-squared statistic of angle samples against a kernel density
// over `bins` equal angular cells.
struct Chi2Result {
    double statistic = 0.0;
    std::size_t dof = 0;
};

inline Chi2Result chi2_angles_vs_kernel(std::span<const double> angles, std::size_t bins,
                                        const std::function<double(double)>& density) {
    std::vector<std::size_t> counts(bins, 0);
    for (double a : angles) {
        std::size_t b = static_cast<std::size_t>(a / kTwoPi * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    // expected mass per bin via midpoint-refined quadrature (16 nodes per bin)
    const double n = static_cast<double>(angles.size());
    double stat = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = kTwoPi * static_cast<double>(b) / static_cast<double>(bins);
        const double w = kTwoPi / static_cast<double>(bins);
        double p = 0.0;
        for (int q = 0; q < 16; ++q) p += density(lo + (q + 0.5) * w / 16.0);
        p *= w / 16.0;
        const double expect = n * p;
        if (expect < 5.0) throw std::runtime_error("chi2: expected bin count below 5, use fewer bins");
        const double diff = static_cast<double>(counts[b]) - expect;
        stat += diff * diff / expect;
    }
    return {stat, bins - 1};
}

// chi-squared critical values at significance 0.01 for the dofs used here
inline double chi2_critical_001(std::size_t dof) {
    switch (dof) {
        case 31: return 52.191;
        case 63: return 92.010;
        case 127: return 166.987;
        case 255: return 310.457;
        default: break;
    }
    // Wilson-Hilferty approximation for other dofs
    const double k = static_cast<double>(dof);
    const double z = 2.326347874;  // N(0,1) quantile at 0.99
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * t * t * t;
}

inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - f) + sorted[hi] * f;
}

inline double quantile(std::vector<double> sample, double q) {
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, q);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-30) throw std::runtime_error("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace holopart
