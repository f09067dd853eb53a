#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "holopart/circle.hpp"

// Fast evaluation of an analytic grid function inside the disc. Crossing
// scans along simulated paths only need |f| to modest accuracy, so probes go
// through a precomputed (radius x angle) modulus table; recorded stopping
// values and exit values use the exact truncated power series.

namespace holopart {

// evaluation interface used by path watchers: cheap modulus probes for
// scanning, exact values for recorded stops
class Evaluator {
  public:
    virtual ~Evaluator() = default;
    virtual double probe_abs(cplx z) const = 0;
    virtual cplx exact(cplx z) const = 0;
    virtual cplx boundary(double theta) const = 0;
};

class DiscEvaluator final : public Evaluator {
  public:
    DiscEvaluator() = default;

    explicit DiscEvaluator(const AnalyticBoundaryFunction& f, std::size_t radial_levels = 160,
                           double s_min = 5e-4)
        : n_(f.n()), levels_(radial_levels), s_min_(s_min) {
        // trim trailing negligible coefficients once
        const auto c = f.coeffs();
        const std::size_t half = f.grid().half();
        double cmax = 0.0;
        for (std::size_t k = 0; k < half; ++k) cmax = std::max(cmax, std::abs(c[k]));
        std::size_t deg = 0;
        for (std::size_t k = 0; k < half; ++k)
            if (std::abs(c[k]) > 1e-18 * cmax) deg = k;
        coeffs_.assign(c.begin(), c.begin() + static_cast<long>(deg + 1));

        // radii 1 - s, s geometric from 1 down to s_min
        log_ratio_ = std::log(s_min_) / static_cast<double>(levels_ - 1);
        table_.resize(levels_ * n_);
        std::vector<cplx> row(n_);
        for (std::size_t l = 0; l < levels_; ++l) {
            const double s = std::exp(log_ratio_ * static_cast<double>(l));
            const double r = 1.0 - s;
            std::fill(row.begin(), row.end(), cplx(0.0, 0.0));
            for (std::size_t k = 0; k < coeffs_.size(); ++k)
                row[k] = coeffs_[k] * std::pow(r, static_cast<double>(k));
            fft::transform(row, true);
            for (std::size_t j = 0; j < n_; ++j)
                table_[l * n_ + j] = std::abs(row[j]) * static_cast<double>(n_);
        }
    }

    std::size_t n() const { return n_; }
    std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

    // bilinear lookup of |f(z)|; cheap, used for crossing triggers and sups
    double probe_abs(cplx z) const override {
        const double r = std::abs(z);
        double s = 1.0 - r;
        s = std::clamp(s, s_min_, 1.0);
        double lf = std::log(s) / log_ratio_;
        lf = std::clamp(lf, 0.0, static_cast<double>(levels_ - 1));
        const std::size_t l0 = std::min(static_cast<std::size_t>(lf), levels_ - 2);
        const double fl = lf - static_cast<double>(l0);
        double th = std::atan2(z.imag(), z.real());
        if (th < 0.0) th += kTwoPi;
        const double jf = th / kTwoPi * static_cast<double>(n_);
        std::size_t j0 = static_cast<std::size_t>(jf);
        if (j0 >= n_) j0 = n_ - 1;
        const double fj = jf - static_cast<double>(j0);
        const std::size_t j1 = (j0 + 1) & (n_ - 1);
        const double a = table_[l0 * n_ + j0] * (1.0 - fj) + table_[l0 * n_ + j1] * fj;
        const double b = table_[(l0 + 1) * n_ + j0] * (1.0 - fj) + table_[(l0 + 1) * n_ + j1] * fj;
        return a * (1.0 - fl) + b * fl;
    }

    // exact truncated power series at an interior point
    cplx exact(cplx z) const override {
        cplx acc(0.0, 0.0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
        return acc;
    }

    // boundary synthesis at an arbitrary angle
    cplx boundary(double theta) const override { return exact_on_circle(std::polar(1.0, theta)); }

    cplx value_at_origin() const { return coeffs_.empty() ? cplx(0.0, 0.0) : coeffs_[0]; }

  private:
    cplx exact_on_circle(cplx z) const {
        cplx acc(0.0, 0.0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
        return acc;
    }

    std::size_t n_ = 0;
    std::size_t levels_ = 0;
    double s_min_ = 5e-4;
    double log_ratio_ = -1.0;
    std::vector<cplx> coeffs_;
    std::vector<double> table_;  // |f| at (level, angle)
};

// pointwise product of two analytic functions, evaluated factor by factor so
// products never pass through a truncated grid representation
class ProductEvaluator final : public Evaluator {
  public:
    ProductEvaluator(const Evaluator& a, const Evaluator& b) : a_(&a), b_(&b) {}
    double probe_abs(cplx z) const override { return a_->probe_abs(z) * b_->probe_abs(z); }
    cplx exact(cplx z) const override { return a_->exact(z) * b_->exact(z); }
    cplx boundary(double theta) const override { return a_->boundary(theta) * b_->boundary(theta); }

  private:
    const Evaluator* a_;
    const Evaluator* b_;
};

}  // namespace holopart
