#pragma once

#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "holopart/circle.hpp"
#include "holopart/paths.hpp"

// The lift M : boundary function -> per-path functional (value at the exit
// point) and its one-sided inverse N : per-path functional -> boundary
// function, realized as harmonic-measure regression on the exit angle
// followed by analytic projection. N(M f) = f up to the regression error and
// N(M(f) F) = f N(F).

namespace holopart {

// M f: composition with the exit point. The evaluator must outlive the
// returned functional.
inline std::function<cplx(const PathEnd&)> lift_M(const DiscEvaluator& f) {
    return [&f](const PathEnd& end) { return f.boundary(end.exit_angle); };
}

struct RegressionDiagnostics {
    std::size_t bins = 0;
    std::size_t min_bin_count = 0;
    double mc_noise_l2 = 0.0;  // sqrt(mean over bins of within-bin variance / count)
};

struct ProjectedFunction {
    AnalyticBoundaryFunction fn;
    RegressionDiagnostics diag;
};

// Conditional expectation given the exit point (bin averages over the exit
// angle), smoothed to the grid and Riesz-projected.
inline ProjectedFunction project_N(std::span<const cplx> per_path_values, std::span<const double> exit_angles,
                                   const CircleGrid& grid, std::size_t bins = 256,
                                   std::size_t min_per_bin = 50) {
    if (per_path_values.size() != exit_angles.size())
        throw std::invalid_argument("project_N: value/angle size mismatch");
    if (bins < 2 || (bins & (bins - 1)) != 0 || bins > grid.n)
        throw std::invalid_argument("project_N: bins must be a power of two <= n");

    std::vector<cplx> sum(bins, cplx(0.0, 0.0));
    std::vector<double> sumsq(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    for (std::size_t i = 0; i < per_path_values.size(); ++i) {
        if (std::isnan(per_path_values[i].real())) continue;  // invalid path
        std::size_t b = static_cast<std::size_t>(exit_angles[i] / kTwoPi * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        sum[b] += per_path_values[i];
        sumsq[b] += std::norm(per_path_values[i]);
        ++count[b];
    }
    std::size_t min_count = count.empty() ? 0 : *std::min_element(count.begin(), count.end());
    if (min_count < min_per_bin) {
        std::ostringstream os;
        os << "project_N: under-filled angular bins (need >= " << min_per_bin << " paths per bin); occupancy:";
        std::size_t listed = 0;
        for (std::size_t b = 0; b < bins && listed < 8; ++b)
            if (count[b] < min_per_bin) {
                os << " bin" << b << "=" << count[b];
                ++listed;
            }
        throw std::runtime_error(os.str());
    }

    RegressionDiagnostics diag;
    diag.bins = bins;
    diag.min_bin_count = min_count;
    double noise = 0.0;
    std::vector<cplx> bin_mean(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        bin_mean[b] = sum[b] / static_cast<double>(count[b]);
        const double var =
            std::max(0.0, sumsq[b] / static_cast<double>(count[b]) - std::norm(bin_mean[b]));
        noise += var / static_cast<double>(count[b]);
    }
    diag.mc_noise_l2 = std::sqrt(noise / static_cast<double>(bins));

    // piecewise-constant upsample, Poisson smoothing at the bin scale,
    // analytic projection
    std::vector<cplx> vals(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        std::size_t b = j * bins / grid.n;
        vals[j] = bin_mean[b];
    }
    BoundaryFunction step = BoundaryFunction::from_values(grid, std::move(vals));
    BoundaryFunction smooth = poisson_smooth(step, 1.0 - kTwoPi / static_cast<double>(bins));
    ProjectedFunction out;
    out.fn = riesz_project(smooth);
    out.diag = diag;
    return out;
}

// Deterministic part of the N(Mf) ~ f regression tolerance: how much of f
// is lost to bin averaging plus the smoothing and projection pipeline,
// computed exactly on the grid (no Monte Carlo).
inline double projection_bias_l2(const AnalyticBoundaryFunction& f, std::size_t bins) {
    const CircleGrid& g = f.grid();
    std::vector<cplx> binned(g.n);
    std::vector<cplx> bin_mean(bins, cplx(0.0, 0.0));
    const std::size_t per = g.n / bins;
    for (std::size_t b = 0; b < bins; ++b) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = b * per; j < (b + 1) * per; ++j) acc += f.values()[j];
        bin_mean[b] = acc / static_cast<double>(per);
    }
    for (std::size_t j = 0; j < g.n; ++j) binned[j] = bin_mean[j * bins / g.n];
    auto step = BoundaryFunction::from_values(g, std::move(binned));
    auto proj = riesz_project(poisson_smooth(step, 1.0 - kTwoPi / static_cast<double>(bins)));
    std::vector<cplx> diff(g.n);
    for (std::size_t j = 0; j < g.n; ++j) diff[j] = proj.values()[j] - f.values()[j];
    return hp_norm(BoundaryFunction::from_values(g, std::move(diff)), 2.0);
}

}  // namespace holopart
