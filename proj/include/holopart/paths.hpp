#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "holopart/circle.hpp"
#include "holopart/disc_eval.hpp"
#include "holopart/rng.hpp"

// Complex Brownian motion in the unit disc, discretized with adaptive Euler
// steps h = h0 * max(h_min, (1-|z|)^2) and finished by one exact exit hop
// drawn from the Poisson kernel (harmonic measure) once the path enters the
// exit band. Level crossings of |F(B_t)| are detected while walking; a step
// that crosses a pending level is re-simulated as sixteen sub-steps drawn
// from a per-step derived seed, and the refined sub-path replaces the step.

namespace holopart {

struct PathConfig {
    double base_step = 5e-3;    // h0
    double step_floor = 4e-6;   // h_min in h = h0 * max(h_min, (1-|z|)^2)
    double exit_band = 2e-3;    // exact exit hop once 1-|z| < exit_band
    std::size_t max_steps = 200000;
    std::uint64_t seed = 1;
    cplx start = cplx(0.0, 0.0);

    void validate() const {
        if (!(base_step > 0.0)) throw std::invalid_argument("PathConfig: base_step must be positive");
        if (!(step_floor > 0.0)) throw std::invalid_argument("PathConfig: step_floor must be positive");
        if (!(exit_band > 1e-6 && exit_band < 1e-2))
            throw std::invalid_argument("PathConfig: exit_band must lie in (1e-6, 1e-2)");
        if (max_steps < 10000) throw std::invalid_argument("PathConfig: max_steps must be >= 1e4");
        if (std::abs(start) >= 1.0 - exit_band)
            throw std::invalid_argument("PathConfig: start point inside exit band");
    }

    bool operator==(const PathConfig&) const = default;
};

// A crossing watcher tracks the first times |fn| exceeds each of an
// ascending list of levels along the path.
struct Crossing {
    int level_index = -1;
    double time = 0.0;
    cplx value;
    cplx z;
};

struct Watcher {
    const Evaluator* fn = nullptr;
    std::vector<double> levels;   // ascending
    double probe_slack = 1e-3;    // exact check fires at level * (1 - slack)
    double refine_margin = 0.35;  // refinement fires at level * (1 - margin)

    // per-path state, reset by the walker
    std::size_t pending = 0;
    std::vector<Crossing> crossings;
    double sup_probe = 0.0;

    void reset() {
        pending = 0;
        crossings.clear();
        sup_probe = 0.0;
    }

    // Refinement must be decided from the current state alone (no peeking at
    // the proposed increment), otherwise discarding near-crossing steps would
    // bias the walk.
    bool wants_refinement(cplx z) const {
        if (pending >= levels.size()) return false;
        return fn->probe_abs(z) > levels[pending] * (1.0 - refine_margin);
    }

    void scan(double t, cplx z) {
        const double p = fn->probe_abs(z);
        if (p > sup_probe) sup_probe = p;
        if (pending >= levels.size()) return;
        if (p > levels[pending] * (1.0 - probe_slack)) {
            const cplx v = fn->exact(z);
            if (std::abs(v) > levels[pending]) {
                crossings.push_back({static_cast<int>(pending), t, v, z});
                ++pending;
            }
        }
    }
};

struct PathEnd {
    bool valid = false;
    double exit_angle = 0.0;  // in [0, 2*pi)
    double exit_time = 0.0;
    std::size_t steps = 0;
};

namespace detail {

inline double wrap_angle(double t) {
    t = std::fmod(t, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return t;
}

}  // namespace detail

// Exit angle from z via the Poisson kernel of the disc (exact in law).
inline double poisson_exit_angle(cplx z, double u01) {
    const double r = std::abs(z);
    const double phi = std::atan2(z.imag(), z.real());
    if (r < 1e-15) return detail::wrap_angle(kTwoPi * u01);
    const double t = std::tan(kPi * (u01 - 0.5));
    const double theta = phi + 2.0 * std::atan(((1.0 - r) / (1.0 + r)) * t);
    return detail::wrap_angle(theta);
}

// Core walker. Watchers are scanned at every accepted point (start included);
// an optional sink receives every accepted (t, z). Returns exit data; invalid
// when max_steps was exhausted.
inline PathEnd walk_path(const PathConfig& cfg, std::uint64_t index, std::span<Watcher> watchers,
                         const std::function<void(double, cplx)>* sink = nullptr) {
    SplitMix64 rng(seed_mix(cfg.seed, seed_tag::path, index));
    cplx z = cfg.start;
    double t = 0.0;
    for (auto& w : watchers) w.reset();

    auto scan_point = [&](double tt, cplx zz) {
        for (auto& w : watchers) w.scan(tt, zz);
        if (sink) (*sink)(tt, zz);
    };
    scan_point(t, z);

    const double band = cfg.exit_band;
    PathEnd end;
    for (std::size_t step = 0; step < cfg.max_steps; ++step) {
        const double dist = 1.0 - std::abs(z);
        if (dist < band) {
            SplitMix64 hop(seed_mix(cfg.seed, seed_tag::exit_hop, index));
            end.valid = true;
            end.exit_angle = poisson_exit_angle(z, hop.uniform01());
            end.exit_time = t + (1.0 - std::norm(z));
            end.steps = step;
            return end;
        }
        const double h = cfg.base_step * std::max(cfg.step_floor, dist * dist);

        // the refinement decision depends only on the current point, so no
        // proposed increment is ever discarded and the stopped series stays
        // an exact martingale of the scheme
        bool refine = false;
        for (const auto& w : watchers)
            if (w.wants_refinement(z)) {
                refine = true;
                break;
            }

        if (refine) {
            SplitMix64 sub(seed_mix(cfg.seed, seed_tag::refine + step, index));
            const double hh = h / 16.0;
            const double shh = std::sqrt(hh);
            cplx zz = z;
            double tt = t;
            for (int s = 0; s < 16; ++s) {
                const Gauss2 gs = gaussian_pair(sub);
                zz += shh * cplx(gs.a, gs.b);
                if (std::abs(zz) >= 1.0) zz *= (1.0 - 0.5 * band) / std::abs(zz);
                tt += hh;
                if (std::abs(zz) >= 1.0 - band) break;
                scan_point(tt, zz);
            }
            z = zz;
        } else {
            const double sh = std::sqrt(h);
            const Gauss2 g = gaussian_pair(rng);
            cplx z1 = z + sh * cplx(g.a, g.b);
            if (std::abs(z1) >= 1.0) z1 *= (1.0 - 0.5 * band) / std::abs(z1);
            z = z1;
            if (std::abs(z) < 1.0 - band) scan_point(t + h, z);
        }
        t += h;
    }
    end.valid = false;
    end.steps = cfg.max_steps;
    return end;
}

// One simulated trajectory with its exit point; points strictly inside the
// disc, exit recorded separately. Materialized only on demand (tests, audit).
struct DiscPath {
    std::vector<double> times;
    std::vector<cplx> points;
    double exit_angle = 0.0;
    double exit_time = 0.0;
    std::uint64_t seed_index = 0;
    bool valid = false;
};

inline DiscPath sample_path(const PathConfig& cfg, std::uint64_t index) {
    cfg.validate();
    DiscPath p;
    p.seed_index = index;
    std::function<void(double, cplx)> rec = [&](double t, cplx z) {
        p.times.push_back(t);
        p.points.push_back(z);
    };
    PathEnd end = walk_path(cfg, index, {}, &rec);
    p.valid = end.valid;
    p.exit_angle = end.exit_angle;
    p.exit_time = end.exit_time;
    return p;
}

// F evaluated along a stored path; the terminal entry is the boundary value
// at the exit angle.
inline std::vector<cplx> eval_along(const DiscPath& path, const AnalyticBoundaryFunction& F) {
    DiscEvaluator ev(F);
    std::vector<cplx> out;
    out.reserve(path.points.size() + 1);
    for (cplx z : path.points) out.push_back(ev.exact(z));
    if (path.valid) out.push_back(ev.boundary(path.exit_angle));
    return out;
}

// --- stopping ladders -----------------------------------------------------

struct StoppingLadder {
    double level_base = 0.0;  // M
    cplx psi0;                // value at the start point
    cplx psi_exit;            // boundary value at the exit angle
    double exit_time = 0.0;
    std::vector<Crossing> crossings;  // realized crossings of M^j, j = level_index+1
    double sup_probe = 0.0;           // discrete sup of |Psi| along the path
    double overshoot = 0.0;           // kappa = max_j |Psi_j| / M^j - 1 over realized j
    bool valid = false;

    int realized() const { return static_cast<int>(crossings.size()); }

    // Psi_j = E(Psi | F_{tau_j}); tau_0 = 0, unrealized levels stop at exit
    cplx psi(int j) const {
        if (j <= 0) return psi0;
        if (j <= realized()) return crossings[static_cast<std::size_t>(j - 1)].value;
        return psi_exit;
    }

    double tau(int j) const {
        if (j <= 0) return 0.0;
        if (j <= realized()) return crossings[static_cast<std::size_t>(j - 1)].time;
        return exit_time;
    }

    // d_j = Psi_{j+1} - Psi_j; zero beyond the last realized level
    cplx increment(int j) const { return psi(j + 1) - psi(j); }
};

inline Watcher make_ladder_watcher(const Evaluator& psi, double level_base, int j_max) {
    if (!(level_base > 1.0)) throw std::invalid_argument("ladder: level base must exceed 1");
    if (j_max < 1) throw std::invalid_argument("ladder: j_max must be >= 1");
    Watcher w;
    w.fn = &psi;
    w.levels.resize(static_cast<std::size_t>(j_max));
    double lv = level_base;
    for (int j = 0; j < j_max; ++j, lv *= level_base) w.levels[static_cast<std::size_t>(j)] = lv;
    return w;
}

// Assemble the ladder from a walked watcher. The watcher must have been
// built by make_ladder_watcher for the same level base.
inline StoppingLadder assemble_ladder(Watcher&& w, const PathEnd& end, const Evaluator& psi, cplx start_value,
                                      double level_base) {
    StoppingLadder lad;
    lad.level_base = level_base;
    lad.valid = end.valid;
    lad.psi0 = start_value;
    lad.exit_time = end.exit_time;
    lad.sup_probe = w.sup_probe;
    lad.crossings = std::move(w.crossings);
    if (end.valid) {
        lad.psi_exit = psi.boundary(end.exit_angle);
        lad.sup_probe = std::max(lad.sup_probe, std::abs(lad.psi_exit));
    }
    double kappa = 0.0;
    for (const auto& c : lad.crossings) {
        const double lev = std::pow(level_base, c.level_index + 1);
        kappa = std::max(kappa, std::abs(c.value) / lev - 1.0);
    }
    lad.overshoot = kappa;
    return lad;
}

// First-crossing ladder of |Psi(B_t)| over levels M^j, j = 1..j_max, along
// the refined path for seed index `index`.
inline StoppingLadder crossing_ladder(const PathConfig& cfg, std::uint64_t index, const Evaluator& psi,
                                      double level_base, int j_max) {
    std::vector<Watcher> w(1, make_ladder_watcher(psi, level_base, j_max));
    PathEnd end = walk_path(cfg, index, w);
    return assemble_ladder(std::move(w[0]), end, psi, psi.exact(cfg.start), level_base);
}

// --- ensembles and Monte Carlo --------------------------------------------

inline unsigned worker_count() {
    if (const char* env = std::getenv("HOLOPART_WORKERS")) {
        const long k = std::strtol(env, nullptr, 10);
        if (k >= 1 && k <= 256) return static_cast<unsigned>(k);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Fixed partition of [0, count) over workers; every worker writes only its
// own slots, so results are identical for any worker count.
inline void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::min<unsigned>(worker_count(), count == 0 ? 1 : static_cast<unsigned>(count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    const std::size_t chunk = 64;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t begin = cursor.fetch_add(chunk);
                if (begin >= count) return;
                const std::size_t endi = std::min(count, begin + chunk);
                for (std::size_t i = begin; i < endi; ++i) body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

struct PathEnsemble {
    PathConfig config;
    std::size_t count = 0;

    PathEnsemble() = default;
    PathEnsemble(PathConfig cfg, std::size_t count_) : config(cfg), count(count_) { config.validate(); }
};

struct McResult {
    cplx mean;
    double stderr_est = 0.0;
    std::size_t used = 0;
    std::size_t invalid = 0;
};

// Sample mean and standard error over per-path values; NaN slots mark
// invalid paths, which are excluded and counted. More than 1% invalid paths
// fails the run.
inline McResult mc_reduce(std::span<const cplx> slots) {
    McResult r;
    cplx sum(0.0, 0.0);
    for (const auto& v : slots) {
        if (std::isnan(v.real())) {
            ++r.invalid;
            continue;
        }
        sum += v;
        ++r.used;
    }
    if (r.used == 0) throw std::runtime_error("mc_reduce: no valid paths");
    if (static_cast<double>(r.invalid) > 0.01 * static_cast<double>(slots.size()))
        throw std::runtime_error("mc_reduce: more than 1% invalid paths (" + std::to_string(r.invalid) + " of " +
                                 std::to_string(slots.size()) + ")");
    r.mean = sum / static_cast<double>(r.used);
    double var = 0.0;
    for (const auto& v : slots) {
        if (std::isnan(v.real())) continue;
        var += std::norm(v - r.mean);
    }
    if (r.used > 1) var /= static_cast<double>(r.used - 1);
    r.stderr_est = std::sqrt(var / static_cast<double>(r.used));
    return r;
}

inline constexpr cplx kInvalidSlot = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);

// Walk every path of the ensemble (parallel, fixed-order slots) and collect
// one value per path. The per-path callback sees the watcher states for its
// own path. Invalid paths yield NaN slots.
inline std::vector<cplx> sweep(const PathEnsemble& ens, std::span<const Watcher> watcher_protos,
                               const std::function<cplx(std::uint64_t, const PathEnd&, std::span<const Watcher>)>& per_path) {
    std::vector<cplx> slots(ens.count);
    parallel_for_index(ens.count, [&](std::size_t i) {
        std::vector<Watcher> w(watcher_protos.begin(), watcher_protos.end());
        PathEnd end = walk_path(ens.config, i, w);
        slots[i] = end.valid ? per_path(i, end, w) : kInvalidSlot;
    });
    return slots;
}

// Evaluate a per-path functional over the whole ensemble and reduce.
inline McResult mc_expectation(const PathEnsemble& ens,
                               const std::function<cplx(std::uint64_t, const PathEnd&)>& functional) {
    return mc_reduce(sweep(ens, {}, [&](std::uint64_t i, const PathEnd& end, std::span<const Watcher>) {
        return functional(i, end);
    }));
}

}  // namespace holopart
