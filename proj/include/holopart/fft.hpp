#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

// Radix-2 FFT for power-of-two sizes. All grids in this library are powers
// of two, so a self-contained iterative Cooley-Tukey kernel is all we need;
// plans (bit-reversal table + twiddles) are cached per thread.

namespace holopart::fft {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

struct Plan {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<cplx> twiddle;  // e^{-2*pi*i*k/n}, k = 0 .. n/2-1

    explicit Plan(std::size_t n_) : n(n_), bitrev(n_), twiddle(n_ / 2) {
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            bitrev[i] = r;
        }
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            twiddle[k] = cplx(std::cos(a), std::sin(a));
        }
    }
};

inline const Plan& plan_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, Plan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Plan(n)).first;
    return it->second;
}

}  // namespace detail

// In-place DFT. forward: X_k = sum_j x_j e^{-2pi i jk/n};
// inverse applies the conjugate kernel and the 1/n factor.
inline void transform(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
    const auto& plan = detail::plan_for(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = plan.bitrev[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx w = plan.twiddle[k * stride];
                if (inverse) w = std::conj(w);
                const cplx u = a[start + k];
                const cplx t = a[start + k + half] * w;
                a[start + k] = u + t;
                a[start + k + half] = u - t;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= s;
    }
}

inline std::vector<cplx> forward(std::vector<cplx> a) {
    transform(a, false);
    return a;
}

inline std::vector<cplx> inverse(std::vector<cplx> a) {
    transform(a, true);
    return a;
}

}  // namespace holopart::fft
