#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "holopart/circle.hpp"
#include "holopart/paths.hpp"

// Maximal operators on the circle and the self-improving weight series
// Delta_1 = sum_n A^n(Delta) (2C)^{-n}. The series is built with a
// deterministic circle surrogate for the path-space maximal operator (the
// Hardy-Littlewood average or the nontangential sup of the outer function);
// the path-space inequality itself is checked distributionally by
// path_maximal_experiment.

namespace holopart {

// Centered Hardy-Littlewood maximal function: sup over arcs centered at each
// grid point of the arc average (the point itself counts as the trivial arc).
inline std::vector<double> hl_maximal(std::span<const double> w) {
    const std::size_t n = w.size();
    std::vector<double> prefix(3 * n + 1, 0.0);
    for (std::size_t i = 0; i < 3 * n; ++i) prefix[i + 1] = prefix[i] + w[i % n];
    const double total_mean = prefix[n] / static_cast<double>(n);
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double best = std::max(w[j], total_mean);
        for (std::size_t a = 1; a + 1 <= n / 2; ++a) {
            const double sum = prefix[j + n + a + 1] - prefix[j + n - a];
            const double avg = sum / static_cast<double>(2 * a + 1);
            if (avg > best) best = avg;
        }
        out[j] = best;
    }
    return out;
}

inline std::vector<double> hl_maximal(const Density& w) { return hl_maximal(w.samples()); }

// Nontangential maximal surrogate: sup of |outer(w)| over the discrete cone
// {z = r e^{i phi} : |phi - theta| <= aperture * (1 - r)} plus the boundary
// value itself.
inline std::vector<double> nt_maximal(std::span<const double> w_samples, const CircleGrid& grid,
                                      double aperture, double floor_abs) {
    if (!(aperture >= 1.0)) throw std::invalid_argument("nt_maximal: aperture must be >= 1");
    const std::size_t n = grid.n;
    std::vector<double> floored(w_samples.begin(), w_samples.end());
    for (double& x : floored) x = std::max(x, floor_abs);
    auto O = outer_from_modulus(Density::from_prefloored(grid, floored, floor_abs));

    std::vector<double> out(floored);  // boundary row: |O| = w
    std::size_t levels = 2;
    while ((std::size_t{1} << levels) < 4 * n) ++levels;
    std::vector<cplx> row(n);
    for (std::size_t l = 0; l <= levels; ++l) {
        const double s = std::pow(0.5, static_cast<double>(l));
        const double r = 1.0 - s;
        std::fill(row.begin(), row.end(), cplx(0.0, 0.0));
        for (std::size_t k = 0; k < grid.half(); ++k)
            row[k] = O.coeffs()[k] * std::pow(r, static_cast<double>(k));
        fft::transform(row, true);
        const std::size_t m = static_cast<std::size_t>(
            std::ceil(aperture * s * static_cast<double>(n) / kTwoPi));
        for (std::size_t j = 0; j < n; ++j) {
            double best = out[j];
            for (std::size_t d = 0; d <= std::min(m, n / 2); ++d) {
                const double a = std::abs(row[(j + d) % n]) * static_cast<double>(n);
                const double b = std::abs(row[(j + n - d) % n]) * static_cast<double>(n);
                best = std::max(best, std::max(a, b));
            }
            out[j] = best;
        }
    }
    return out;
}

inline std::vector<double> nt_maximal(const Density& w, double aperture) {
    return nt_maximal(w.samples(), w.grid(), aperture, w.floor());
}

enum class MaximalKind { hl, nt };

inline const char* to_string(MaximalKind k) { return k == MaximalKind::hl ? "hl" : "nt"; }

struct WeightReport {
    double input_mass = 0.0;       // mean of Delta
    double output_mass = 0.0;      // mean of Delta_1
    double domination = 0.0;       // max Delta / Delta_1 (n = 0 term gives <= 1)
    double maximal_control = 0.0;  // max A(Delta_1) / Delta_1
    double series_constant = 0.0;  // C
    int n_max = 0;
    double tail_estimate = 0.0;  // <= 2^{-n_max} * input mass
    std::vector<double> term_mass_ratios;
};

struct BuiltWeight {
    Density delta1;
    WeightReport report;
};

// Truncated series Delta_1 = sum_{k=0}^{n_max} A^k(Delta) (2C)^{-k}. With
// C = 0 the constant is measured from the realized term-mass ratios
// (1.2x headroom) and, for the nt surrogate, bumped until the pointwise
// self-control A(Delta_1) <= 2C Delta_1 holds; a user-supplied C that the
// terms outgrow is an error naming the measured norm.
inline BuiltWeight build_weight(const Density& w, MaximalKind kind, double C = 0.0, int n_max = 16,
                                double aperture = 2.0) {
    if (n_max < 8) throw std::invalid_argument("build_weight: n_max must be >= 8");
    const std::size_t n = w.n();
    auto apply = [&](std::span<const double> f) {
        return kind == MaximalKind::hl ? hl_maximal(f) : nt_maximal(f, w.grid(), aperture, w.floor());
    };

    // realized term masses (independent of C)
    std::vector<std::vector<double>> terms;
    terms.emplace_back(w.samples().begin(), w.samples().end());
    std::vector<double> masses;
    masses.push_back(w.sample_mean());
    double measured_norm = 0.0;
    for (int k = 1; k <= n_max; ++k) {
        terms.push_back(apply(terms.back()));
        const double m = std::accumulate(terms.back().begin(), terms.back().end(), 0.0) / static_cast<double>(n);
        measured_norm = std::max(measured_norm, m / masses.back());
        masses.push_back(m);
    }

    const bool auto_c = !(C > 0.0);
    if (auto_c) C = 1.2 * std::max(measured_norm, 1.0);
    if (C < measured_norm * (1.0 - 1e-12))
        throw std::runtime_error("build_weight: series terms grow faster than C; measured operator norm " +
                                 std::to_string(measured_norm) + " exceeds C = " + std::to_string(C));

    auto assemble = [&](double Cc) {
        std::vector<double> d1(terms[0]);
        double scale = 1.0;
        for (int k = 1; k <= n_max; ++k) {
            scale /= 2.0 * Cc;
            for (std::size_t j = 0; j < n; ++j) d1[j] += scale * terms[static_cast<std::size_t>(k)][j];
        }
        return d1;
    };

    std::vector<double> d1 = assemble(C);
    std::vector<double> Ad1 = apply(d1);
    if (auto_c) {
        for (int round = 0; round < 4; ++round) {
            double ratio = 0.0;
            for (std::size_t j = 0; j < n; ++j) ratio = std::max(ratio, (Ad1[j] - 1e-9) / d1[j]);
            if (ratio <= 2.0 * C) break;
            C = 0.55 * ratio;
            d1 = assemble(C);
            Ad1 = apply(d1);
        }
    }

    WeightReport rep;
    rep.input_mass = masses[0];
    rep.output_mass = std::accumulate(d1.begin(), d1.end(), 0.0) / static_cast<double>(n);
    rep.series_constant = C;
    rep.n_max = n_max;
    rep.tail_estimate = std::pow(0.5, n_max) * masses[0];
    double dom = 0.0, ctrl = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        dom = std::max(dom, w.samples()[j] / d1[j]);
        ctrl = std::max(ctrl, Ad1[j] / d1[j]);
    }
    rep.domination = dom;
    rep.maximal_control = ctrl;
    for (std::size_t k = 1; k < masses.size(); ++k) rep.term_mass_ratios.push_back(masses[k] / masses[k - 1]);

    BuiltWeight out;
    out.delta1 = Density::from_prefloored(w.grid(), std::move(d1), w.floor());
    out.report = std::move(rep);
    return out;
}

// Theorem-2 weight: B >= b with controlled mass and hl self-control.
inline BuiltWeight kislyakov_weight(const Density& b, int n_max = 12) {
    return build_weight(b, MaximalKind::hl, 0.0, n_max);
}

// --- path-space experiment -------------------------------------------------

struct PathMaximalSummary {
    double mean_sup = 0.0;
    double stderr_est = 0.0;
    double l1_norm = 0.0;  // ||d||_1 = mean of w
    double ratio = 0.0;    // mean_sup / l1_norm (the Varopoulos ratio)
    double sup_q50 = 0.0, sup_q90 = 0.0, sup_q99 = 0.0;
    double cmp_q99 = 0.0;  // 0.99 quantile of (path sup) / (nt maximal at exit)
    std::size_t paths = 0;
};

// Per-path sup of |d(B_t)| with d = outer(w): the Monte Carlo side of
// A(Delta), compared against the lifted deterministic surrogate at the exit
// point.
inline PathMaximalSummary path_maximal_experiment(const Density& w, const PathEnsemble& ens,
                                                  double aperture = 2.0) {
    auto d = outer_from_modulus(w);
    DiscEvaluator ev(d);
    std::vector<double> nt = nt_maximal(w, aperture);
    const CircleGrid& g = w.grid();

    std::vector<double> sups(ens.count, -1.0), cmps(ens.count, -1.0);
    parallel_for_index(ens.count, [&](std::size_t i) {
        std::vector<Watcher> watch(1);
        watch[0].fn = &ev;  // no levels: tracks the running sup only
        PathEnd end = walk_path(ens.config, i, watch);
        if (!end.valid) return;
        double sup = watch[0].sup_probe;
        sup = std::max(sup, std::abs(ev.boundary(end.exit_angle)));
        sups[i] = sup;
        // linear interpolation of the grid surrogate at the exit angle
        const double x = end.exit_angle / kTwoPi * static_cast<double>(g.n);
        std::size_t j0 = static_cast<std::size_t>(x) % g.n;
        const double f = x - std::floor(x);
        const double surrogate = nt[j0] * (1.0 - f) + nt[(j0 + 1) % g.n] * f;
        cmps[i] = sup / surrogate;
    });

    std::vector<double> sup_valid, cmp_valid;
    sup_valid.reserve(ens.count);
    for (std::size_t i = 0; i < ens.count; ++i)
        if (sups[i] >= 0.0) {
            sup_valid.push_back(sups[i]);
            cmp_valid.push_back(cmps[i]);
        }
    if (sup_valid.size() < ens.count - ens.count / 100)
        throw std::runtime_error("path_maximal_experiment: more than 1% invalid paths");

    PathMaximalSummary s;
    s.paths = sup_valid.size();
    double mean = 0.0;
    for (double v : sup_valid) mean += v;
    mean /= static_cast<double>(sup_valid.size());
    double var = 0.0;
    for (double v : sup_valid) var += (v - mean) * (v - mean);
    var /= static_cast<double>(sup_valid.size() - 1);
    s.mean_sup = mean;
    s.stderr_est = std::sqrt(var / static_cast<double>(sup_valid.size()));
    s.l1_norm = w.sample_mean();
    s.ratio = s.mean_sup / s.l1_norm;
    std::sort(sup_valid.begin(), sup_valid.end());
    std::sort(cmp_valid.begin(), cmp_valid.end());
    auto q = [](const std::vector<double>& v, double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
    };
    s.sup_q50 = q(sup_valid, 0.5);
    s.sup_q90 = q(sup_valid, 0.9);
    s.sup_q99 = q(sup_valid, 0.99);
    s.cmp_q99 = q(cmp_valid, 0.99);
    return s;
}

}  // namespace holopart
