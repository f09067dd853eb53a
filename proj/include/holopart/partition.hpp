#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "holopart/circle.hpp"
#include "holopart/havin.hpp"
#include "holopart/lift.hpp"
#include "holopart/paths.hpp"
#include "holopart/weights.hpp"

// The analytic partition of unity {theta_i, w_i, c_i}. Stopping ladders of
// Psi = outer(Delta_1) at levels M^j supply per-path telescoping factors
// theta_i; Havin pairs on the lifted super-level sets of the nontangential
// maximal of Delta_1 supply circle functions w_i with w_i ~ 1 where d_i
// lives; c_i = M^{i+8}. Verification is Monte Carlo for the integral
// properties and exact on the grid for the pointwise ones.

namespace holopart {

struct PartitionParams {
    MaximalKind weight_backend = MaximalKind::hl;
    double nt_aperture = 2.0;
    int weight_n_max = 16;
    HavinParams havin;
    std::size_t preflight_paths = 2000;  // overshoot sanity sample
};

struct PartitionLevel {
    int i = 0;  // level index, -1 .. i_max
    BoundarySet set;
    HavinPair pair;
    AnalyticBoundaryFunction w;
    double c = 0.0;  // M^{i+8}
};

struct PartitionOfUnity {
    double delta_param = 0.0;  // delta
    double level_base = 0.0;   // M = 1/delta
    double eps = 0.0;          // M^{-2}
    int i_max = 0;
    Density delta;
    BuiltWeight weight;  // Delta_1 and its report
    AnalyticBoundaryFunction psi;
    std::vector<double> nt_of_delta1;
    std::vector<PartitionLevel> levels;  // index i + 1
    std::uint64_t seed = 0;
    PartitionParams params;

    const PartitionLevel& level(int i) const { return levels.at(static_cast<std::size_t>(i + 1)); }
    int level_count() const { return static_cast<int>(levels.size()); }
};

// per-path evaluation record
struct PartitionPathData {
    bool valid = false;
    double exit_angle = 0.0;
    cplx psi_exit;
    double sup_psi = 0.0;
    double overshoot = 0.0;
    std::vector<cplx> theta;   // index i + 1
    std::vector<cplx> w_exit;  // index i + 1
    cplx phi;                  // sum theta_i w_i^2
    StoppingLadder ladder;
};

class PartitionEngine {
  public:
    explicit PartitionEngine(const PartitionOfUnity& p) : p_(&p) {
        psi_eval_ = DiscEvaluator(p.psi);
        w_evals_.reserve(p.levels.size());
        for (const auto& lv : p.levels) w_evals_.emplace_back(lv.w);
        psi0_ = psi_eval_.exact(cplx(0.0, 0.0));
    }

    const DiscEvaluator& psi_eval() const { return psi_eval_; }
    const DiscEvaluator& w_eval(int i) const { return w_evals_.at(static_cast<std::size_t>(i + 1)); }
    cplx psi0() const { return psi0_; }
    int j_max() const { return std::max(p_->i_max, 1); }

    // Walk one path with the Psi ladder plus any extra watchers; assemble the
    // telescoping partition data. The top increment absorbs the remainder to
    // the exit value, so sum_i theta_i = 1 exactly per path.
    PartitionPathData run_path(const PathConfig& cfg, std::uint64_t index,
                               std::vector<Watcher>* extra = nullptr) const {
        std::vector<Watcher> watchers;
        watchers.push_back(make_ladder_watcher(psi_eval_, p_->level_base, j_max()));
        const std::size_t base_count = watchers.size();
        if (extra)
            for (auto& w : *extra) watchers.push_back(w);

        PathEnd end = walk_path(cfg, index, watchers);
        if (extra)
            for (std::size_t k = 0; k < extra->size(); ++k) (*extra)[k] = watchers[base_count + k];

        PartitionPathData d;
        d.valid = end.valid;
        if (!end.valid) return d;
        d.ladder = assemble_ladder(std::move(watchers[0]), end, psi_eval_, psi0_, p_->level_base);
        d.exit_angle = end.exit_angle;
        d.psi_exit = d.ladder.psi_exit;
        d.sup_psi = d.ladder.sup_probe;
        d.overshoot = d.ladder.overshoot;

        const int imax = p_->i_max;
        d.theta.resize(static_cast<std::size_t>(imax + 2));
        d.w_exit.resize(static_cast<std::size_t>(imax + 2));
        const cplx denom = d.psi_exit;
        d.theta[0] = psi0_ / denom;  // theta_{-1}
        for (int i = 0; i < imax; ++i) d.theta[static_cast<std::size_t>(i + 1)] = d.ladder.increment(i) / denom;
        // top level absorbs the tail so the telescoping closes exactly
        d.theta[static_cast<std::size_t>(imax + 1)] = (d.psi_exit - d.ladder.psi(imax)) / denom;

        d.phi = cplx(0.0, 0.0);
        for (int i = -1; i <= imax; ++i) {
            const cplx w = w_evals_[static_cast<std::size_t>(i + 1)].boundary(end.exit_angle);
            d.w_exit[static_cast<std::size_t>(i + 1)] = w;
            d.phi += d.theta[static_cast<std::size_t>(i + 1)] * w * w;
        }
        return d;
    }

  private:
    const PartitionOfUnity* p_;
    DiscEvaluator psi_eval_;
    std::vector<DiscEvaluator> w_evals_;
    cplx psi0_;
};

inline PartitionOfUnity build_partition(const Density& delta, double delta_param, const PathEnsemble& ensemble,
                                        const PartitionParams& params = {}) {
    if (!(delta_param > 0.0 && delta_param < 1.0))
        throw std::invalid_argument("build_partition: delta must lie in (0, 1)");
    if (std::abs(delta.sample_mean() - 1.0) > 1e-9)
        throw std::invalid_argument("build_partition: density must be normalized to unit mean");

    PartitionOfUnity p;
    p.delta_param = delta_param;
    p.level_base = 1.0 / delta_param;
    p.eps = delta_param * delta_param;  // M^{-2}
    p.delta = delta;
    p.seed = ensemble.config.seed;
    p.params = params;

    p.weight = build_weight(delta, params.weight_backend, 0.0, params.weight_n_max, params.nt_aperture);
    p.psi = outer_from_modulus(p.weight.delta1);
    p.nt_of_delta1 = nt_maximal(p.weight.delta1, params.nt_aperture);

    const double nt_max = *std::max_element(p.nt_of_delta1.begin(), p.nt_of_delta1.end());
    p.i_max = std::max(0, static_cast<int>(std::ceil(std::log(nt_max) / std::log(p.level_base))));

    const CircleGrid& g = delta.grid();
    for (int i = -1; i <= p.i_max; ++i) {
        PartitionLevel lv;
        lv.i = i;
        lv.set = BoundarySet::super_level(g, p.nt_of_delta1, std::pow(p.level_base, i));
        if (i == -1 && lv.set.empty()) lv.set = BoundarySet::full_circle(g);
        lv.pair = havin_pair(lv.set, p.eps, params.havin);
        lv.c = std::pow(p.level_base, i + 8);
        p.levels.push_back(std::move(lv));
    }

    // w_i = 5 alpha_i * prod_{s=8}^{S} beta_{i+s}^s; factors for empty sets
    // are identically one (degenerate Havin branch), so the product truncates
    // exactly at the last nonempty level.
    for (int i = -1; i <= p.i_max; ++i) {
        auto& lv = p.levels[static_cast<std::size_t>(i + 1)];
        BoundaryFunction w = scale(lv.pair.alpha.fn(), 5.0);
        for (int s = 8; i + s <= p.i_max; ++s) {
            const auto& beta = p.levels[static_cast<std::size_t>(i + s + 1)].pair.beta;
            if (p.levels[static_cast<std::size_t>(i + s + 1)].set.empty()) continue;
            w = multiply_padded(w, pow_padded(beta.fn(), static_cast<unsigned>(s)));
        }
        lv.w = AnalyticBoundaryFunction::measure(std::move(w));
    }

    // overshoot preflight: a too-coarse step policy invalidates the ladder
    PartitionEngine engine(p);
    const std::size_t sample = std::min(ensemble.count, params.preflight_paths);
    std::vector<double> kappa(sample, 0.0);
    parallel_for_index(sample, [&](std::size_t k) {
        auto d = engine.run_path(ensemble.config, k);
        kappa[k] = d.valid ? d.overshoot : 0.0;
    });
    std::size_t coarse = 0;
    for (double k : kappa)
        if (k > 0.5) ++coarse;
    if (static_cast<double>(coarse) > 0.01 * static_cast<double>(sample))
        throw std::runtime_error("build_partition: ladder overshoot exceeds 0.5 on more than 1% of paths; "
                                 "step policy too coarse");
    return p;
}

struct PartitionReport {
    double theta_sup = 0.0;               // max_i sup_paths |theta_i|
    std::vector<double> theta_sup_level;  // per level
    double sum_w_max = 0.0;               // grid max of sum |w_i|
    double w_sup = 0.0;                   // max_i sup |w_i|
    std::size_t w_delta_violations = 0;   // points with |w_i| Delta > c_i
    double sum_c_w_l1 = 0.0;              // sum c_i ||w_i||_1
    double c_fit = 0.0;                   // log(sum_c_w_l1) / log(1/delta)
    double residual_mean = 0.0;           // int |1 - sum theta w^2| Delta dP
    double residual_stderr = 0.0;
    double partition_exactness = 0.0;     // max |sum theta_i - 1| per path
    std::size_t support_violations = 0;   // d_i != 0 with path sup < M^i, i >= 1
    double i0_support_fraction = 0.0;     // same for i = 0 (reported, not asserted)
    std::size_t dbound_violations = 0;    // |d_i| > 2(1+kappa) M^{i+1}
    double overshoot_q99 = 0.0;
    std::size_t paths_used = 0;
    std::size_t paths_invalid = 0;
};

inline PartitionReport verify_partition(const PartitionOfUnity& p, const Density& delta,
                                        const PathEnsemble& ensemble) {
    if (p.seed != ensemble.config.seed)
        throw std::invalid_argument("verify_partition: partition/ensemble seed mismatch");
    const CircleGrid& g = delta.grid();
    const int imax = p.i_max;
    PartitionReport r;
    r.theta_sup_level.assign(static_cast<std::size_t>(imax + 2), 0.0);

    // pointwise grid checks
    double sum_w_max = 0.0, w_sup = 0.0, sum_c_l1 = 0.0;
    std::size_t viol = 0;
    for (int i = -1; i <= imax; ++i) {
        const auto& lv = p.level(i);
        double l1 = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            const double wj = std::abs(lv.w.values()[j]);
            w_sup = std::max(w_sup, wj);
            l1 += wj;
            if (wj * delta.samples()[j] > lv.c * (1.0 + 1e-9)) ++viol;
        }
        sum_c_l1 += lv.c * l1 / static_cast<double>(g.n);
    }
    for (std::size_t j = 0; j < g.n; ++j) {
        double s = 0.0;
        for (int i = -1; i <= imax; ++i) s += std::abs(p.level(i).w.values()[j]);
        sum_w_max = std::max(sum_w_max, s);
    }
    r.sum_w_max = sum_w_max;
    r.w_sup = w_sup;
    r.w_delta_violations = viol;
    r.sum_c_w_l1 = sum_c_l1;
    r.c_fit = std::log(std::max(sum_c_l1, 1.0)) / std::log(1.0 / p.delta_param);

    // Monte Carlo sweep
    PartitionEngine engine(p);
    struct Slot {
        cplx residual = kInvalidSlot;
        double exact = 0.0;
        double theta_max = 0.0;
        double kappa = 0.0;
        std::vector<double> theta_abs;
        std::vector<std::uint8_t> support_bad;
        std::uint8_t i0_bad = 0;
        std::uint8_t dbound_bad = 0;
    };
    std::vector<Slot> slots(ensemble.count);
    const double M = p.level_base;
    parallel_for_index(ensemble.count, [&](std::size_t k) {
        auto d = engine.run_path(ensemble.config, k);
        if (!d.valid) return;
        Slot s;
        const double dexit_angle = d.exit_angle;
        // Delta at the exit point via boundary synthesis of the density's
        // outer function would change the weight; linear interpolation of the
        // grid samples is the honest evaluation of the lifted density
        const double x = dexit_angle / kTwoPi * static_cast<double>(g.n);
        std::size_t j0 = static_cast<std::size_t>(x) % g.n;
        const double frac = x - std::floor(x);
        const double delta_exit = delta.samples()[j0] * (1.0 - frac) + delta.samples()[(j0 + 1) % g.n] * frac;
        s.residual = cplx(std::abs(1.0 - d.phi) * delta_exit, 0.0);
        cplx tsum(0.0, 0.0);
        s.theta_abs.resize(d.theta.size());
        for (std::size_t t = 0; t < d.theta.size(); ++t) {
            tsum += d.theta[t];
            s.theta_abs[t] = std::abs(d.theta[t]);
            s.theta_max = std::max(s.theta_max, s.theta_abs[t]);
        }
        s.exact = std::abs(tsum - cplx(1.0, 0.0));
        s.kappa = d.overshoot;
        // support and size of the increments
        s.support_bad.assign(static_cast<std::size_t>(imax + 1), 0);
        const double sup = std::max({d.sup_psi, std::abs(engine.psi0()), std::abs(d.psi_exit)});
        for (int i = 0; i <= imax; ++i) {
            const cplx di = i < imax ? d.ladder.increment(i) : (d.psi_exit - d.ladder.psi(imax));
            if (std::abs(di) < 1e-12) continue;
            const double level = std::pow(M, i);
            if (sup < level * (1.0 - 1e-9)) {
                if (i == 0)
                    s.i0_bad = 1;
                else
                    s.support_bad[static_cast<std::size_t>(i)] = 1;
            }
            if (std::abs(di) > 2.0 * (1.0 + d.overshoot) * std::pow(M, i + 1) * (1.0 + 1e-9)) s.dbound_bad = 1;
        }
        slots[k] = std::move(s);
    });

    std::vector<cplx> residuals(ensemble.count);
    std::vector<double> kappas;
    kappas.reserve(ensemble.count);
    for (std::size_t k = 0; k < ensemble.count; ++k) {
        const auto& s = slots[k];
        residuals[k] = s.residual;
        if (std::isnan(s.residual.real())) continue;
        r.partition_exactness = std::max(r.partition_exactness, s.exact);
        r.theta_sup = std::max(r.theta_sup, s.theta_max);
        for (std::size_t t = 0; t < s.theta_abs.size(); ++t)
            r.theta_sup_level[t] = std::max(r.theta_sup_level[t], s.theta_abs[t]);
        for (auto b : s.support_bad) r.support_violations += b;
        r.i0_support_fraction += s.i0_bad;
        r.dbound_violations += s.dbound_bad;
        kappas.push_back(s.kappa);
    }
    auto mc = mc_reduce(residuals);
    r.residual_mean = mc.mean.real();
    r.residual_stderr = mc.stderr_est;
    r.paths_used = mc.used;
    r.paths_invalid = mc.invalid;
    r.i0_support_fraction /= static_cast<double>(std::max<std::size_t>(mc.used, 1));
    std::sort(kappas.begin(), kappas.end());
    r.overshoot_q99 = kappas.empty() ? 0.0 : kappas[static_cast<std::size_t>(0.99 * (kappas.size() - 1))];
    return r;
}

// --- projection to the circle (the boundary form of the partition) --------

struct Theorem1Family {
    std::vector<AnalyticBoundaryFunction> g;      // N(theta_i w_i^2)
    std::vector<AnalyticBoundaryFunction> gamma;  // inner factors
    std::vector<AnalyticBoundaryFunction> tau;    // square roots of the outer factors
    std::vector<double> c;
};

struct Theorem1Report {
    double gamma_sup = 0.0;          // max_j ||gamma_j||_inf
    double sum_tau2gamma_max = 0.0;  // grid max of sum |tau_j^2 gamma_j|
    double sum_tau_sq_max = 0.0;     // grid max of sum |tau_j|^2
    std::size_t tau_f_violations = 0;
    double sum_c_tau_l1 = 0.0;
    double c_fit = 0.0;
    double residual_circle = 0.0;  // int |1 - sum gamma_j tau_j^2| f dt
    double projection_tol = 0.0;   // 3x (regression noise + binning bias)
    double recon_error = 0.0;      // max_j ||gamma_j tau_j^2 - g_j||_inf
    double nm_identity_err = 0.0;  // ||N(M f_test) - f_test||_2
    double nm_identity_tol = 0.0;
};

inline Theorem1Report project_theorem1(const PartitionOfUnity& p, const Density& f,
                                       const PathEnsemble& ensemble, Theorem1Family* family_out = nullptr,
                                       std::size_t bins = 256) {
    if (p.seed != ensemble.config.seed)
        throw std::invalid_argument("project_theorem1: partition/ensemble seed mismatch");
    for (std::size_t j = 0; j < f.n(); ++j)
        if (std::abs(f.samples()[j] - p.delta.samples()[j]) > 1e-12)
            throw std::invalid_argument("project_theorem1: density must be the lift source of the partition");

    const CircleGrid& g = f.grid();
    const int imax = p.i_max;
    PartitionEngine engine(p);

    // per-path functionals theta_i w_i^2 and exit angles
    const std::size_t nlev = static_cast<std::size_t>(imax + 2);
    std::vector<std::vector<cplx>> vals(nlev, std::vector<cplx>(ensemble.count, kInvalidSlot));
    std::vector<double> angles(ensemble.count, 0.0);
    parallel_for_index(ensemble.count, [&](std::size_t k) {
        auto d = engine.run_path(ensemble.config, k);
        if (!d.valid) return;
        angles[k] = d.exit_angle;
        for (std::size_t t = 0; t < nlev; ++t) vals[t][k] = d.theta[t] * d.w_exit[t] * d.w_exit[t];
    });

    Theorem1Family fam;
    Theorem1Report rep;
    double noise_total = 0.0, bias_total = 0.0;
    for (std::size_t t = 0; t < nlev; ++t) {
        auto proj = project_N(vals[t], angles, g, bins);
        noise_total += proj.diag.mc_noise_l2;
        bias_total += projection_bias_l2(proj.fn, bins);
        auto io = inner_outer(proj.fn);
        std::vector<double> root(g.n);
        for (std::size_t j = 0; j < g.n; ++j) root[j] = std::sqrt(std::abs(io.outer.values()[j]));
        auto tau = outer_from_abs(g, root, 0.0);
        fam.g.push_back(std::move(proj.fn));
        fam.gamma.push_back(std::move(io.inner));
        fam.tau.push_back(std::move(tau));
        fam.c.push_back(p.levels[t].c);
    }

    // five boundary properties against f
    double gamma_sup = 0.0, recon = 0.0;
    std::vector<cplx> sum_g(g.n, cplx(0.0, 0.0));
    double sum_tau2gamma = 0.0, sum_tau_sq = 0.0;
    std::size_t tau_viol = 0;
    double sum_c_l1 = 0.0;
    for (std::size_t t = 0; t < nlev; ++t) {
        double l1 = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            const cplx gamma = fam.gamma[t].values()[j];
            const cplx tau = fam.tau[t].values()[j];
            gamma_sup = std::max(gamma_sup, std::abs(gamma));
            const cplx gt = gamma * tau * tau;
            recon = std::max(recon, std::abs(gt - fam.g[t].values()[j]));
            sum_g[j] += gt;
            l1 += std::abs(tau);
            if (std::abs(tau) * f.samples()[j] > fam.c[t] * (1.0 + 1e-9)) ++tau_viol;
        }
        sum_c_l1 += fam.c[t] * l1 / static_cast<double>(g.n);
    }
    for (std::size_t j = 0; j < g.n; ++j) {
        double s2g = 0.0, st2 = 0.0;
        for (std::size_t t = 0; t < nlev; ++t) {
            const double tau_abs = std::abs(fam.tau[t].values()[j]);
            s2g = std::max(s2g, 0.0);
            st2 += tau_abs * tau_abs;
            s2g = 0.0;
        }
        (void)s2g;
        sum_tau_sq = std::max(sum_tau_sq, st2);
    }
    for (std::size_t j = 0; j < g.n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < nlev; ++t)
            s += std::abs(fam.gamma[t].values()[j]) * std::norm(fam.tau[t].values()[j]);
        sum_tau2gamma = std::max(sum_tau2gamma, s);
    }
    double resid = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) resid += std::abs(1.0 - sum_g[j]) * f.samples()[j];
    resid /= static_cast<double>(g.n);

    rep.gamma_sup = gamma_sup;
    rep.sum_tau2gamma_max = sum_tau2gamma;
    rep.sum_tau_sq_max = sum_tau_sq;
    rep.tau_f_violations = tau_viol;
    rep.sum_c_tau_l1 = sum_c_l1;
    rep.c_fit = std::log(std::max(sum_c_l1, 1.0)) / std::log(1.0 / p.delta_param);
    rep.residual_circle = resid;
    rep.projection_tol = 3.0 * (noise_total + bias_total);
    rep.recon_error = recon;

    // NM = Id spot check on the outer function of f itself
    auto f_outer = outer_from_modulus(f);
    DiscEvaluator fev(f_outer);
    std::vector<cplx> fvals(ensemble.count, kInvalidSlot);
    parallel_for_index(ensemble.count, [&](std::size_t k) {
        if (std::isnan(vals[0][k].real())) return;
        fvals[k] = fev.boundary(angles[k]);
    });
    auto fproj = project_N(fvals, angles, g, bins);
    std::vector<cplx> diff(g.n);
    for (std::size_t j = 0; j < g.n; ++j) diff[j] = fproj.fn.values()[j] - f_outer.values()[j];
    rep.nm_identity_err = hp_norm(BoundaryFunction::from_values(g, std::move(diff)), 2.0);
    rep.nm_identity_tol = 3.0 * (projection_bias_l2(f_outer, bins) + fproj.diag.mc_noise_l2);

    if (family_out) *family_out = std::move(fam);
    return rep;
}

}  // namespace holopart
