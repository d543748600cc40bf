#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "qtrap/errors.hpp"

namespace qtrap {

/// Fick current at an absorbing wall for unit initial density: -sqrt(D / (pi t)).
inline double diffusion_current(double diffusivity, double t) {
    if (!(diffusivity > 0.0) || !(t > 0.0)) throw ArgumentError("diffusion_current: D and t must be positive");
    return -std::sqrt(diffusivity / (std::numbers::pi * t));
}

namespace detail {

// Integer arithmetic for n <= 60, log-gamma beyond.
inline double binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n || n < 0) return 0.0;
    if (n <= 60) {
        std::uint64_t c = 1;
        const std::int64_t kk = std::min(k, n - k);
        for (std::int64_t i = 1; i <= kk; ++i) c = c * static_cast<std::uint64_t>(n - kk + i) / static_cast<std::uint64_t>(i);
        return static_cast<double>(c);
    }
    return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0));
}

/// 2^{-t} binom(n, k); log space for t > 60 so large t cannot overflow.
inline double scaled_binomial(std::int64_t t, std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n || n < 0) return 0.0;
    if (t <= 60) return std::ldexp(binomial(n, k), -static_cast<int>(t));
    return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0) - static_cast<double>(t) * std::numbers::ln2);
}

/// 4^{-m} binom(2m, m). Exact product for small m; for m >= 64 the Stirling
/// series of its logarithm, -ln(pi m)/2 + sum_k B_2k (2^{1-2k} - 2) / (2k (2k-1) m^{2k-1}),
/// whose omitted terms are below 1e-20 there.
inline double central_binomial_share(std::int64_t m) {
    if (m < 64) {
        double c = 1.0;
        for (std::int64_t j = 1; j <= m; ++j) c *= static_cast<double>(2 * j - 1) / static_cast<double>(2 * j);
        return c;
    }
    static constexpr double bernoulli_terms[] = {1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0};
    const double x = static_cast<double>(m);
    double series = 0.0, power = x, half = 0.5;
    for (double b : bernoulli_terms) {
        series += b * (half - 2.0) / power;
        power *= x * x;
        half *= 0.25;
    }
    return std::exp(series - 0.5 * std::log(std::numbers::pi * x));
}

}  // namespace detail

/// Probability that a simple random walk started at x >= 1 first reaches 0
/// at step t: 2^{-t} [binom(t-1, (t-x)/2) - binom(t-1, (t-x-2)/2)] for
/// t - x even and non-negative, 0 otherwise.
inline double rw_first_passage(std::int64_t x, std::int64_t t) {
    if (x < 1) throw ArgumentError("rw_first_passage: start site must be positive");
    if (t < x || (t - x) % 2 != 0) return 0.0;
    const std::int64_t k = (t - x) / 2;
    return detail::scaled_binomial(t, t - 1, k) - detail::scaled_binomial(t, t - 1, k - 1);
}

struct WalkCurrentPoint {
    std::int64_t t = 0;
    double J = 0.0;
};

/// J(t) = 2^{-t} binom(t-1, floor((t-1)/2)), asymptotically 1/sqrt(2 pi t).
/// Both parities reduce to 4^{-m} binom(2m, m) / 2 with m = floor(t/2), so
/// J(2m) = J(2m+1) holds exactly.
inline WalkCurrentPoint rw_current(std::int64_t t) {
    if (t < 1) throw ArgumentError("rw_current: t must be at least 1");
    return {t, 0.5 * detail::central_binomial_share(t / 2)};
}

}  // namespace qtrap
