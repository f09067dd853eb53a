#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "holopart/fft.hpp"

// Discretized boundary analysis on the unit circle: grid functions with a
// synchronized value/coefficient representation, Riesz (analytic) projection,
// harmonic conjugates, outer functions, inner-outer factorization and norms.
//
// Conventions:
//   - grid angles theta_k = 2*pi*k/n, each sample carries mass 1/n;
//   - coeffs[k] is the coefficient of e^{i*k*theta} for k < n/2 and of
//     e^{i*(k-n)*theta} for k >= n/2 (signed frequency k-n);
//   - the harmonic conjugate is normalized to zero mean, so the analytic
//     completion u + i*conj(u) is real at the origin.

namespace holopart {

using cplx = std::complex<double>;
inline constexpr double kPi = fft::kPi;
inline constexpr double kTwoPi = 2.0 * fft::kPi;

struct CircleGrid {
    std::size_t n = 0;

    CircleGrid() = default;
    explicit CircleGrid(std::size_t n_) : n(n_) {
        if (!fft::is_pow2(n) || n < 16)
            throw std::invalid_argument("CircleGrid: n must be a power of two, n >= 16");
    }

    double angle(std::size_t k) const { return kTwoPi * static_cast<double>(k) / static_cast<double>(n); }
    double cell() const { return kTwoPi / static_cast<double>(n); }
    std::size_t half() const { return n / 2; }

    friend bool operator==(const CircleGrid& a, const CircleGrid& b) { return a.n == b.n; }
};

class BoundaryFunction {
  public:
    BoundaryFunction() = default;

    static BoundaryFunction from_values(const CircleGrid& g, std::vector<cplx> vals) {
        if (vals.size() != g.n) throw std::invalid_argument("from_values: size mismatch");
        BoundaryFunction f;
        f.grid_ = g;
        f.values_ = std::move(vals);
        f.coeffs_ = f.values_;
        fft::transform(f.coeffs_, false);
        const double s = 1.0 / static_cast<double>(g.n);
        for (auto& c : f.coeffs_) c *= s;
        return f;
    }

    static BoundaryFunction from_coeffs(const CircleGrid& g, std::vector<cplx> coeffs) {
        if (coeffs.size() != g.n) throw std::invalid_argument("from_coeffs: size mismatch");
        BoundaryFunction f;
        f.grid_ = g;
        f.coeffs_ = std::move(coeffs);
        f.values_ = f.coeffs_;
        fft::transform(f.values_, true);
        for (auto& v : f.values_) v *= static_cast<double>(g.n);
        return f;
    }

    static BoundaryFunction from_real(const CircleGrid& g, const std::vector<double>& vals) {
        std::vector<cplx> v(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
        return from_values(g, std::move(v));
    }

    static BoundaryFunction constant(const CircleGrid& g, cplx c) {
        return from_values(g, std::vector<cplx>(g.n, c));
    }

    const CircleGrid& grid() const { return grid_; }
    std::size_t n() const { return grid_.n; }
    std::span<const cplx> values() const { return values_; }
    std::span<const cplx> coeffs() const { return coeffs_; }

    // coefficient of e^{i*freq*theta}, freq in [-n/2, n/2)
    cplx coeff(long freq) const {
        const long n = static_cast<long>(grid_.n);
        if (freq < -n / 2 || freq >= n / 2) throw std::out_of_range("coeff: frequency outside grid band");
        return coeffs_[static_cast<std::size_t>(freq >= 0 ? freq : freq + n)];
    }

    cplx mean() const { return coeffs_[0]; }

    double max_abs_value() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    // largest negative-frequency coefficient modulus (Nyquist counts as negative)
    double negative_residual() const {
        double m = 0.0;
        for (std::size_t k = grid_.half(); k < grid_.n; ++k) m = std::max(m, std::abs(coeffs_[k]));
        return m;
    }

    bool is_real(double tol = 1e-10) const {
        for (const auto& v : values_)
            if (std::abs(v.imag()) > tol) return false;
        return true;
    }

    std::vector<double> real_values() const {
        std::vector<double> r(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) r[i] = values_[i].real();
        return r;
    }

  private:
    CircleGrid grid_;
    std::vector<cplx> values_;
    std::vector<cplx> coeffs_;
};

inline BoundaryFunction add(const BoundaryFunction& a, const BoundaryFunction& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("add: grid mismatch");
    std::vector<cplx> v(a.n());
    for (std::size_t i = 0; i < a.n(); ++i) v[i] = a.values()[i] + b.values()[i];
    return BoundaryFunction::from_values(a.grid(), std::move(v));
}

inline BoundaryFunction scale(const BoundaryFunction& a, cplx s) {
    std::vector<cplx> v(a.n());
    for (std::size_t i = 0; i < a.n(); ++i) v[i] = s * a.values()[i];
    return BoundaryFunction::from_values(a.grid(), std::move(v));
}

// Pointwise product computed alias-free: both factors are synthesized on a
// 4n grid, multiplied there, and the result is truncated back to the n-grid
// frequency band. Truncation is a spectral projection, not wrap-around.
inline BoundaryFunction multiply_padded(const BoundaryFunction& a, const BoundaryFunction& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("multiply_padded: grid mismatch");
    const std::size_t n = a.n();
    const std::size_t m = 4 * n;
    auto lift = [&](const BoundaryFunction& f) {
        std::vector<cplx> big(m, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < n / 2; ++k) big[k] = f.coeffs()[k];
        for (std::size_t k = n / 2; k < n; ++k) big[m - n + k] = f.coeffs()[k];
        fft::transform(big, true);
        for (auto& x : big) x *= static_cast<double>(m);
        return big;
    };
    std::vector<cplx> va = lift(a);
    std::vector<cplx> vb = lift(b);
    for (std::size_t i = 0; i < m; ++i) va[i] *= vb[i];
    fft::transform(va, false);
    std::vector<cplx> out(n);
    const double s = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n / 2; ++k) out[k] = va[k] * s;
    for (std::size_t k = n / 2; k < n; ++k) out[k] = va[m - n + k] * s;
    return BoundaryFunction::from_coeffs(a.grid(), std::move(out));
}

inline BoundaryFunction pow_padded(const BoundaryFunction& a, unsigned e) {
    BoundaryFunction acc = BoundaryFunction::constant(a.grid(), 1.0);
    BoundaryFunction base = a;
    while (e > 0) {
        if (e & 1u) acc = multiply_padded(acc, base);
        e >>= 1u;
        if (e) base = multiply_padded(base, base);
    }
    return acc;
}

// Complex samples with (near-)vanishing negative frequencies. tol_a records
// the measured violation relative to the largest coefficient; exactly
// projected functions carry tol_a = 0.
class AnalyticBoundaryFunction {
  public:
    AnalyticBoundaryFunction() = default;

    static AnalyticBoundaryFunction measure(BoundaryFunction f) {
        AnalyticBoundaryFunction a;
        const double mc = f.max_abs_coeff();
        a.tol_a_ = mc > 0.0 ? f.negative_residual() / mc : 0.0;
        a.f_ = std::move(f);
        return a;
    }

    static AnalyticBoundaryFunction constant(const CircleGrid& g, cplx c) {
        return measure(BoundaryFunction::constant(g, c));
    }

    const BoundaryFunction& fn() const { return f_; }
    const CircleGrid& grid() const { return f_.grid(); }
    std::size_t n() const { return f_.n(); }
    std::span<const cplx> values() const { return f_.values(); }
    std::span<const cplx> coeffs() const { return f_.coeffs(); }
    double tol_a() const { return tol_a_; }
    cplx mean() const { return f_.mean(); }

    // value of the power series at an interior point; |z| <= 1 - 1e-9
    cplx evaluate(cplx z) const {
        if (std::abs(z) > 1.0 - 1e-9)
            throw std::domain_error("evaluate_interior: |z| too close to 1, use boundary samples");
        return horner(z);
    }

    // trig-polynomial synthesis on |z| = 1 (the function's own boundary value)
    cplx boundary_value(double theta) const { return horner(std::polar(1.0, theta)); }

  private:
    cplx horner(cplx z) const {
        const auto c = f_.coeffs();
        const std::size_t half = f_.grid().half();
        cplx acc(0.0, 0.0);
        for (std::size_t k = half; k-- > 0;) acc = acc * z + c[k];
        return acc;
    }

    BoundaryFunction f_;
    double tol_a_ = 0.0;
};

// --- circle_core operations ---------------------------------------------

// Analytic (Riesz) projection: zero out every negative frequency including
// Nyquist. Idempotent by construction.
inline AnalyticBoundaryFunction riesz_project(const BoundaryFunction& f) {
    std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t k = f.grid().half(); k < f.n(); ++k) c[k] = cplx(0.0, 0.0);
    AnalyticBoundaryFunction out = AnalyticBoundaryFunction::measure(BoundaryFunction::from_coeffs(f.grid(), std::move(c)));
    return out;
}

inline AnalyticBoundaryFunction riesz_project(const AnalyticBoundaryFunction& f) { return riesz_project(f.fn()); }

// Harmonic conjugate of a real function: multiplier -i*sign(k) with the
// Nyquist bin zeroed (keeps real inputs real) and zero mean.
inline BoundaryFunction conjugate(const BoundaryFunction& u) {
    std::vector<cplx> c(u.coeffs().begin(), u.coeffs().end());
    const std::size_t n = u.n();
    const std::size_t half = u.grid().half();
    c[0] = cplx(0.0, 0.0);
    for (std::size_t k = 1; k < half; ++k) c[k] *= cplx(0.0, -1.0);
    c[half] = cplx(0.0, 0.0);
    for (std::size_t k = half + 1; k < n; ++k) c[k] *= cplx(0.0, 1.0);
    return BoundaryFunction::from_coeffs(u.grid(), std::move(c));
}

class Density {
  public:
    Density() = default;

    // floor_rel scales the positivity floor by the raw mean; normalize
    // rescales to unit sample mean (intermediate weights may opt out).
    static Density from_samples(const CircleGrid& g, std::vector<double> raw, bool normalize = true,
                                double floor_rel = 1e-8) {
        if (raw.size() != g.n) throw std::invalid_argument("Density: size mismatch");
        double mean = 0.0;
        for (double x : raw) {
            if (!std::isfinite(x)) throw std::invalid_argument("Density: non-finite sample");
            mean += x;
        }
        mean /= static_cast<double>(g.n);
        if (mean <= 0.0) throw std::invalid_argument("Density: non-positive mean");
        double eta = floor_rel * mean;
        for (double& x : raw) x = std::max(x, eta);
        if (normalize) {
            double m2 = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(g.n);
            for (double& x : raw) x /= m2;
            eta /= m2;
        }
        Density d;
        d.grid_ = g;
        d.samples_ = std::move(raw);
        d.floor_ = eta;
        return d;
    }

    // samples already floored by the caller; floor_abs is recorded as eta
    static Density from_prefloored(const CircleGrid& g, std::vector<double> samples, double floor_abs) {
        if (samples.size() != g.n) throw std::invalid_argument("Density: size mismatch");
        if (!(floor_abs > 0.0)) throw std::invalid_argument("Density: floor must be positive");
        for (double x : samples)
            if (!(x >= floor_abs)) throw std::invalid_argument("Density: sample below stated floor");
        Density d;
        d.grid_ = g;
        d.samples_ = std::move(samples);
        d.floor_ = floor_abs;
        return d;
    }

    static Density uniform(const CircleGrid& g) { return from_samples(g, std::vector<double>(g.n, 1.0)); }

    const CircleGrid& grid() const { return grid_; }
    std::size_t n() const { return grid_.n; }
    std::span<const double> samples() const { return samples_; }
    double floor() const { return floor_; }
    double sample_mean() const {
        return std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(grid_.n);
    }
    double max() const { return *std::max_element(samples_.begin(), samples_.end()); }
    double min() const { return *std::min_element(samples_.begin(), samples_.end()); }

    BoundaryFunction as_function() const { return BoundaryFunction::from_real(grid_, samples_); }

  private:
    CircleGrid grid_;
    std::vector<double> samples_;
    double floor_ = 0.0;
};

// Outer function with |O| = w on the grid: O = exp(log w + i * conj(log w)).
// The modulus is exact at the samples by construction; the analyticity
// residual is measured and stored on the result.
inline AnalyticBoundaryFunction outer_from_modulus(const Density& w) {
    const std::size_t n = w.n();
    if (!(w.floor() > 0.0))
        throw std::invalid_argument("outer_from_modulus: density carries no positivity floor");
    for (double x : w.samples())
        if (x < w.floor() * (1.0 - 1e-12))
            throw std::invalid_argument("outer_from_modulus: density sample below its floor");
    std::vector<double> logw(n);
    for (std::size_t i = 0; i < n; ++i) logw[i] = std::log(w.samples()[i]);
    BoundaryFunction L = BoundaryFunction::from_real(w.grid(), logw);
    BoundaryFunction Lc = conjugate(L);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(cplx(L.values()[i].real(), Lc.values()[i].real()));
    return AnalyticBoundaryFunction::measure(BoundaryFunction::from_values(w.grid(), std::move(out)));
}

// Convenience: outer function from arbitrary positive samples (no
// normalization), flooring at floor_rel * max.
inline AnalyticBoundaryFunction outer_from_abs(const CircleGrid& g, const std::vector<double>& mod,
                                               double floor_rel = 1e-12) {
    const double m = *std::max_element(mod.begin(), mod.end());
    if (!(m > 0.0)) throw std::invalid_argument("outer_from_abs: vanishing modulus");
    std::vector<double> floored(mod);
    for (double& x : floored) x = std::max(x, floor_rel * m);
    return outer_from_modulus(Density::from_prefloored(g, std::move(floored), floor_rel * m));
}

struct InnerOuter {
    AnalyticBoundaryFunction inner;
    AnalyticBoundaryFunction outer;
    double unimodular_error = 0.0;  // sup | |inner| - 1 | on the grid
};

// inner-outer split: outer carries the (floored) modulus, inner = g / outer.
// Boundary zeros are floored at eta * max|g|; unimodular_error reports the
// damage.
inline InnerOuter inner_outer(const AnalyticBoundaryFunction& g, double eta = 1e-8) {
    const std::size_t n = g.n();
    std::vector<double> mod(n);
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mod[i] = std::abs(g.values()[i]);
        mx = std::max(mx, mod[i]);
    }
    if (mx <= 0.0) throw std::domain_error("inner_outer: degenerate factorization of ~0 input");
    for (double& x : mod) x = std::max(x, eta * mx);
    AnalyticBoundaryFunction out = outer_from_abs(g.grid(), mod, eta);
    std::vector<cplx> inner_vals(n);
    double uerr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inner_vals[i] = g.values()[i] / out.values()[i];
        uerr = std::max(uerr, std::abs(std::abs(inner_vals[i]) - 1.0));
    }
    InnerOuter io;
    io.inner = AnalyticBoundaryFunction::measure(BoundaryFunction::from_values(g.grid(), std::move(inner_vals)));
    io.outer = std::move(out);
    io.unimodular_error = uerr;
    return io;
}

// Sample-average weighted p-norm; p = inf is the grid max of |f| (weight
// ignored there).
inline double hp_norm(const BoundaryFunction& f, double p, const Density* weight = nullptr) {
    if (p < 1.0) throw std::invalid_argument("hp_norm: p must be >= 1");
    if (std::isinf(p)) return f.max_abs_value();
    double acc = 0.0;
    const std::size_t n = f.n();
    for (std::size_t i = 0; i < n; ++i) {
        double w = weight ? weight->samples()[i] : 1.0;
        acc += std::pow(std::abs(f.values()[i]), p) * w;
    }
    return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

inline double hp_norm(const AnalyticBoundaryFunction& f, double p, const Density* weight = nullptr) {
    return hp_norm(f.fn(), p, weight);
}

inline double mean_weighted(std::span<const double> values, std::span<const double> weight) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * weight[i];
    return acc / static_cast<double>(values.size());
}

// Poisson smoothing at radius r: coefficient k scaled by r^{|k|}.
inline BoundaryFunction poisson_smooth(const BoundaryFunction& f, double r) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("poisson_smooth: r in [0,1)");
    const std::size_t n = f.n();
    const std::size_t half = f.grid().half();
    std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t k = 1; k < half; ++k) c[k] *= std::pow(r, static_cast<double>(k));
    c[half] *= std::pow(r, static_cast<double>(half));
    for (std::size_t k = half + 1; k < n; ++k) c[k] *= std::pow(r, static_cast<double>(n - k));
    return BoundaryFunction::from_coeffs(f.grid(), std::move(c));
}

// --- serialization --------------------------------------------------------

// CSV: one row per sample, "index,re,im".
inline void write_csv(const BoundaryFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out.precision(17);
    out << "index,re,im\n";
    for (std::size_t i = 0; i < f.n(); ++i)
        out << i << "," << f.values()[i].real() << "," << f.values()[i].imag() << "\n";
}

// Binary coefficient dump: little-endian f64, interleaved re/im, coefficient
// index ascending 0..n-1.
inline void write_coeffs_binary(const BoundaryFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_coeffs_binary: cannot open " + path);
    for (const auto& c : f.coeffs()) {
        const double re = c.real(), im = c.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

inline BoundaryFunction read_coeffs_binary(const CircleGrid& g, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_coeffs_binary: cannot open " + path);
    std::vector<cplx> c(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), sizeof(double));
        in.read(reinterpret_cast<char*>(&im), sizeof(double));
        if (!in) throw std::runtime_error("read_coeffs_binary: short file");
        c[i] = cplx(re, im);
    }
    return BoundaryFunction::from_coeffs(g, std::move(c));
}

}  // namespace holopart
