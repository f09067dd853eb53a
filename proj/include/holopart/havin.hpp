#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "holopart/circle.hpp"

// Havin pairs: analytic (alpha, beta) with |alpha| + |beta| <= 1 that nearly
// realize "1/5 on E, 0 off E" within the rigidity of analyticity.
//
// Construction. chi is a Poisson smoothing of the indicator of E, floored at
// c0 = 0.7/N; beta is the N-th power of the outer function with modulus
// e^{-chi}, and alpha := (1/5)(1 - beta)^2. The floor keeps |beta| <= e^{-0.7}
// off E, which makes 5(1-|beta|) >= |1-beta|^2 hold everywhere, so alpha
// already spends no more than the pointwise budget min((1/5)|1-beta|^2,
// 1-|beta|) and no phase-carrying outer correction is needed: on E the pair
// is a polynomial in the small quantity beta. The price is an additive
// O((0.7)^2) term in ||1-beta||_2^2, visible in the measured constants for
// small sets.

namespace holopart {

struct BoundarySet {
    CircleGrid grid;
    std::vector<std::uint8_t> mask;

    static BoundarySet from_mask(const CircleGrid& g, std::vector<std::uint8_t> m) {
        if (m.size() != g.n) throw std::invalid_argument("BoundarySet: mask size mismatch");
        return {g, std::move(m)};
    }

    static BoundarySet empty_set(const CircleGrid& g) { return {g, std::vector<std::uint8_t>(g.n, 0)}; }
    static BoundarySet full_circle(const CircleGrid& g) { return {g, std::vector<std::uint8_t>(g.n, 1)}; }

    // arc of given measure (fraction of the circle) centered at `center`
    static BoundarySet arc(const CircleGrid& g, double center, double measure) {
        std::vector<std::uint8_t> m(g.n, 0);
        const double half = kPi * measure;
        for (std::size_t j = 0; j < g.n; ++j)
            if (std::abs(std::remainder(g.angle(j) - center, kTwoPi)) < half) m[j] = 1;
        return {g, std::move(m)};
    }

    static BoundarySet union_of(const BoundarySet& a, const BoundarySet& b) {
        if (!(a.grid == b.grid)) throw std::invalid_argument("BoundarySet: grid mismatch");
        std::vector<std::uint8_t> m(a.grid.n);
        for (std::size_t j = 0; j < a.grid.n; ++j) m[j] = a.mask[j] | b.mask[j];
        return {a.grid, std::move(m)};
    }

    // threshold set {f > level}
    static BoundarySet super_level(const CircleGrid& g, std::span<const double> f, double level) {
        std::vector<std::uint8_t> m(g.n, 0);
        for (std::size_t j = 0; j < g.n; ++j) m[j] = f[j] > level ? 1 : 0;
        return {g, std::move(m)};
    }

    // Cantor-like set: start from an arc and repeatedly remove the middle
    // fraction of every component.
    static BoundarySet cantor_like(const CircleGrid& g, double center, double base_measure, int depth,
                                   double remove_fraction = 0.2) {
        struct Seg {
            double c, len;
        };
        std::vector<Seg> segs{{center, kTwoPi * base_measure}};
        for (int d = 0; d < depth; ++d) {
            std::vector<Seg> next;
            for (const auto& s : segs) {
                const double keep = 0.5 * (1.0 - remove_fraction) * s.len;
                next.push_back({s.c - 0.5 * s.len + 0.5 * keep, keep});
                next.push_back({s.c + 0.5 * s.len - 0.5 * keep, keep});
            }
            segs = std::move(next);
        }
        std::vector<std::uint8_t> m(g.n, 0);
        for (std::size_t j = 0; j < g.n; ++j)
            for (const auto& s : segs)
                if (std::abs(std::remainder(g.angle(j) - s.c, kTwoPi)) < 0.5 * s.len) {
                    m[j] = 1;
                    break;
                }
        return {g, std::move(m)};
    }

    double measure() const {
        std::size_t c = 0;
        for (auto v : mask) c += v;
        return static_cast<double>(c) / static_cast<double>(grid.n);
    }

    bool empty() const { return measure() == 0.0; }

    // circular distance (in cells) to the nearest point of the complement;
    // grid.n means the complement is empty
    std::vector<std::size_t> distance_to_complement() const {
        const std::size_t n = grid.n;
        std::vector<std::size_t> d(n, n);
        bool any_zero = false;
        for (std::size_t j = 0; j < n; ++j)
            if (!mask[j]) {
                d[j] = 0;
                any_zero = true;
            }
        if (!any_zero) return d;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < 2 * n; ++i) {
                const std::size_t j = i % n;
                const std::size_t prev = (j + n - 1) % n;
                d[j] = std::min(d[j], d[prev] + 1);
            }
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 2 * n; i-- > 0;) {
                const std::size_t j = i % n;
                const std::size_t next = (j + 1) % n;
                d[j] = std::min(d[j], d[next] + 1);
            }
        return d;
    }

    // E_rho: points of E at angular distance > rho from the complement
    std::vector<std::uint8_t> interior(double rho_radians) const {
        const auto d = distance_to_complement();
        const double cells = rho_radians / grid.cell();
        std::vector<std::uint8_t> m(grid.n, 0);
        for (std::size_t j = 0; j < grid.n; ++j)
            if (mask[j] && static_cast<double>(d[j]) > cells) m[j] = 1;
        return m;
    }

    // run-length encoding as [start_index, length) arcs
    std::vector<std::pair<std::size_t, std::size_t>> to_arcs() const {
        std::vector<std::pair<std::size_t, std::size_t>> arcs;
        const std::size_t n = grid.n;
        std::size_t start0 = 0;
        bool found = false;
        for (std::size_t k = 0; k < n; ++k)
            if (!mask[k] && mask[(k + 1) % n]) {
                start0 = (k + 1) % n;
                found = true;
                break;
            }
        if (!found) {
            if (mask[0]) arcs.emplace_back(0, n);  // full circle
            return arcs;
        }
        std::size_t j = start0, seen = 0;
        while (seen < n) {
            if (mask[j]) {
                std::size_t len = 0;
                const std::size_t s = j;
                while (mask[j] && len < n) {
                    j = (j + 1) % n;
                    ++len;
                    ++seen;
                }
                arcs.emplace_back(s, len);
            } else {
                j = (j + 1) % n;
                ++seen;
            }
        }
        return arcs;
    }
};

struct HavinParams {
    double smooth_cells = 8.0;     // Poisson smoothing radius rho in grid cells
    double interior_factor = 9.0;  // E_rho margin = interior_factor * smoothing radius
    double chi_floor = 0.7;        // chi floored at chi_floor / N
};

struct HavinReport {
    double budget_max = 0.0;         // max |alpha| + |beta|          vs 1 + 1e-9
    double alpha_dev = 0.0;          // max_{E_rho} |alpha - 1/5|     vs eps
    double beta_max = 0.0;           // max_{E_rho} |beta|            vs eps
    double alpha_l1 = 0.0;           // ||alpha||_1                   vs log(1/eps)^2 P(E)
    double one_minus_beta_l2 = 0.0;  // ||1 - beta||_2                vs log(1/eps) sqrt(P(E))
    double alpha_l1_ratio = 0.0;
    double beta_l2_ratio = 0.0;
    double slack_alpha = 0.0;  // alpha_dev / eps
    double slack_beta = 0.0;   // beta_max / eps
    double eta_rho = 0.0;      // 1 - min_{E_rho} chi
    double budget_chain_violation = 0.0;  // max(|alpha| - min((1/5)|1-b|^2, 1-|b|))
    double one_minus_G_l2 = 0.0;
    double chi_l2 = 0.0;
    bool interior_empty = false;
};

struct HavinPair {
    AnalyticBoundaryFunction alpha;
    AnalyticBoundaryFunction beta;
    double eps = 0.0;
    int n_power = 0;            // N
    double rho_smooth = 0.0;    // radians
    double rho_interior = 0.0;  // radians
    std::vector<std::uint8_t> interior_mask;
    std::vector<double> chi;  // floored smoothed indicator
    HavinReport report;
};

inline HavinReport verify_havin(const HavinPair& pair, const BoundarySet& E) {
    const CircleGrid& g = E.grid;
    HavinReport r;
    const double pe = E.measure();
    const double logeps = std::log(1.0 / pair.eps);
    double budget = 0.0, adev = 0.0, bmax = 0.0, l1 = 0.0, l2 = 0.0, chain = 0.0;
    bool any_interior = false;
    double chi_min_int = 1.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const cplx a = pair.alpha.values()[j];
        const cplx b = pair.beta.values()[j];
        const double ab = std::abs(a), bb = std::abs(b);
        budget = std::max(budget, ab + bb);
        l1 += ab;
        l2 += std::norm(1.0 - b);
        chain = std::max(chain, ab - std::min(0.2 * std::norm(1.0 - b), 1.0 - bb));
        if (!pair.interior_mask.empty() && pair.interior_mask[j]) {
            any_interior = true;
            adev = std::max(adev, std::abs(a - 0.2));
            bmax = std::max(bmax, bb);
            if (!pair.chi.empty()) chi_min_int = std::min(chi_min_int, pair.chi[j]);
        }
    }
    r.budget_max = budget;
    r.alpha_dev = adev;
    r.beta_max = bmax;
    r.alpha_l1 = l1 / static_cast<double>(g.n);
    r.one_minus_beta_l2 = std::sqrt(l2 / static_cast<double>(g.n));
    r.interior_empty = !any_interior;
    r.eta_rho = any_interior && !pair.chi.empty() ? 1.0 - chi_min_int : 0.0;
    r.budget_chain_violation = chain;
    r.slack_alpha = pair.eps > 0.0 ? adev / pair.eps : 0.0;
    r.slack_beta = pair.eps > 0.0 ? bmax / pair.eps : 0.0;
    const double denom1 = logeps * logeps * pe;
    const double denom2 = logeps * std::sqrt(pe);
    r.alpha_l1_ratio = denom1 > 0.0 ? r.alpha_l1 / denom1 : 0.0;
    r.beta_l2_ratio = denom2 > 0.0 ? r.one_minus_beta_l2 / denom2 : 0.0;
    if (!pair.chi.empty()) {
        double c2 = 0.0;
        for (double c : pair.chi) c2 += c * c;
        r.chi_l2 = std::sqrt(c2 / static_cast<double>(g.n));
    }
    return r;
}

inline HavinPair havin_pair(const BoundarySet& E, double eps, const HavinParams& params = {}) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("havin_pair: eps must lie in (0, 1)");
    const CircleGrid& g = E.grid;
    const std::size_t n = g.n;
    HavinPair pair;
    pair.eps = eps;
    pair.rho_smooth = params.smooth_cells * g.cell();
    pair.rho_interior = params.interior_factor * pair.rho_smooth;

    if (E.measure() == 0.0) {  // degenerate branch: nothing to peak on
        pair.alpha = AnalyticBoundaryFunction::constant(g, 0.0);
        pair.beta = AnalyticBoundaryFunction::constant(g, 1.0);
        pair.n_power = 0;
        pair.interior_mask.assign(n, 0);
        pair.chi.assign(n, 0.0);
        pair.report = verify_havin(pair, E);
        return pair;
    }

    const int N = static_cast<int>(std::ceil(std::log(1.0 / eps)));
    pair.n_power = N;
    const double floor_c = params.chi_floor / static_cast<double>(N);

    // (1) chi: Poisson smoothing of the indicator at radius 1 - rho, floored
    std::vector<double> ind(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) ind[j] = E.mask[j] ? 1.0 : 0.0;
    std::vector<double> chi =
        poisson_smooth(BoundaryFunction::from_real(g, ind), 1.0 - pair.rho_smooth).real_values();
    for (double& c : chi) c = std::clamp(std::max(c, floor_c), 0.0, 1.0);
    std::vector<double> chi_conj = conjugate(BoundaryFunction::from_real(g, chi)).real_values();

    // (2)-(3) beta = G^N with G outer, |G| = e^{-chi}
    std::vector<cplx> beta_v(n);
    for (std::size_t j = 0; j < n; ++j)
        beta_v[j] = std::exp(cplx(-static_cast<double>(N) * chi[j], -static_cast<double>(N) * chi_conj[j]));

    // (4)-(5) alpha = (1/5)(1-beta)^2; the chi floor keeps |beta| <= e^{-0.7}
    // off E, so this already satisfies |alpha| <= min((1/5)|1-b|^2, 1-|b|)
    std::vector<cplx> alpha_v(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx omb = 1.0 - beta_v[j];
        alpha_v[j] = 0.2 * omb * omb;
    }

    pair.interior_mask = E.interior(pair.rho_interior);
    pair.alpha = AnalyticBoundaryFunction::measure(BoundaryFunction::from_values(g, std::move(alpha_v)));
    pair.beta = AnalyticBoundaryFunction::measure(BoundaryFunction::from_values(g, std::move(beta_v)));
    pair.chi = std::move(chi);
    pair.report = verify_havin(pair, E);

    // 1 - G in L2 for the verification chain ||1-beta||_2 <= N ||1-G||_2
    double g2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx Gv = std::exp(cplx(-pair.chi[j], -chi_conj[j]));
        g2 += std::norm(1.0 - Gv);
    }
    pair.report.one_minus_G_l2 = std::sqrt(g2 / static_cast<double>(n));
    return pair;
}

}  // namespace holopart
