#pragma once

// Probability measures on the unit circle: representations, Fourier
// moments, Poisson integrals and the principal-value Hilbert transform.
//
// Moment convention: mu^(s) = \int mu(dtheta) e^{-i s theta}.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "qtrap/errors.hpp"
#include "qtrap/linalg.hpp"
#include "qtrap/summation.hpp"

namespace qtrap {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to the canonical branch [0, 2pi).
inline double reduce_angle(double theta) {
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Signed difference a - b on the circle, in (-pi, pi].
inline double angle_difference(double a, double b) {
    double d = std::remainder(a - b, two_pi);
    if (d <= -std::numbers::pi) d += two_pi;
    return d;
}

inline double circular_distance(double a, double b) { return std::abs(angle_difference(a, b)); }

struct AtomicMeasure {
    std::vector<double> angles;
    std::vector<double> weights;
};

/// Density rho on the grid theta_k = 2 pi k / M, normalised so that
/// (1/M) sum_k rho_k = 1, i.e. mu(dtheta) = rho(theta) dtheta / 2pi.
struct DensityMeasure {
    std::vector<double> values;

    std::size_t mesh() const noexcept { return values.size(); }
    double grid_angle(std::size_t k) const noexcept {
        return two_pi * static_cast<double>(k) / static_cast<double>(values.size());
    }
};

/// Bernoulli measure mu_p pushed to the circle by theta = 2 pi x, handled
/// through its level-n dyadic discretisation.
struct BernoulliMeasure {
    double p = 0.5;
    int level = 13;
};

using SpectralMeasure = std::variant<AtomicMeasure, DensityMeasure, BernoulliMeasure>;

inline constexpr int default_bernoulli_level = 13;
inline constexpr int max_bernoulli_level = 24;

// ---------------------------------------------------------------------------
// construction and validation

inline void validate(const AtomicMeasure& m) {
    if (m.angles.empty()) throw ValidationError("atomic measure: no atoms");
    if (m.angles.size() != m.weights.size())
        throw ValidationError("atomic measure: angles and weights differ in length");
    CompensatedSum total;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        const double w = m.weights[j];
        const double a = m.angles[j];
        if (!std::isfinite(w) || w < 0.0)
            throw ValidationError("atomic measure: weight " + std::to_string(j) + " is negative or not finite");
        if (!std::isfinite(a) || a < 0.0 || a >= two_pi)
            throw ValidationError("atomic measure: angle " + std::to_string(j) + " outside [0, 2pi)");
        total += w;
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw ValidationError("atomic measure: weights sum to " + std::to_string(total.value()) + ", not 1");
    std::vector<double> sorted = m.angles;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValidationError("atomic measure: angles are not pairwise distinct");
}

inline void validate(const DensityMeasure& m) {
    if (m.values.size() < 2) throw ValidationError("density measure: grid needs at least two points");
    CompensatedSum total;
    for (std::size_t k = 0; k < m.values.size(); ++k) {
        const double v = m.values[k];
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("density measure: value " + std::to_string(k) + " is negative or not finite");
        total += v;
    }
    const double mean = total.value() / static_cast<double>(m.values.size());
    if (std::abs(mean - 1.0) > 1e-10)
        throw ValidationError("density measure: grid average is " + std::to_string(mean) + ", not 1");
}

inline void check_bernoulli_parameters(double p, int level) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("bernoulli: p must lie strictly between 0 and 1");
    if (level < 1) throw ArgumentError("bernoulli: level must be positive");
    if (level > max_bernoulli_level)
        throw ResourceError("bernoulli: level " + std::to_string(level) + " exceeds the supported maximum " +
                            std::to_string(max_bernoulli_level));
}

inline void validate(const BernoulliMeasure& m) {
    try {
        check_bernoulli_parameters(m.p, m.level);
    } catch (const ArgumentError& e) {
        throw ValidationError(e.what());
    }
}

inline void validate(const SpectralMeasure& m) {
    std::visit([](const auto& v) { validate(v); }, m);
}

/// Atomic measure with angles reduced to [0, 2pi); validated.
inline AtomicMeasure make_atomic(std::vector<double> angles, std::vector<double> weights) {
    for (double& a : angles) a = reduce_angle(a);
    AtomicMeasure m{std::move(angles), std::move(weights)};
    validate(m);
    return m;
}

inline AtomicMeasure dirac(double angle = 0.0) { return make_atomic({angle}, {1.0}); }

inline DensityMeasure lebesgue(std::size_t mesh = 8192) { return DensityMeasure{std::vector<double>(mesh, 1.0)}; }

/// Samples f on the grid and validates; f must already be normalised.
template <class F>
DensityMeasure make_density(F&& f, std::size_t mesh = 8192) {
    DensityMeasure m;
    m.values.resize(mesh);
    for (std::size_t k = 0; k < mesh; ++k) m.values[k] = f(two_pi * static_cast<double>(k) / static_cast<double>(mesh));
    validate(m);
    return m;
}

namespace detail {

inline std::vector<double> bernoulli_weights(double p, int level) {
    const std::size_t n_atoms = std::size_t{1} << level;
    std::vector<double> table(static_cast<std::size_t>(level) + 1);
    for (int w = 0; w <= level; ++w) table[static_cast<std::size_t>(w)] = std::pow(p, w) * std::pow(1.0 - p, level - w);
    std::vector<double> weights(n_atoms);
    for (std::size_t k = 0; k < n_atoms; ++k)
        weights[k] = table[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(k)))];
    return weights;
}

/// c_s = sum_k w_k e^{-2 pi i s k / N}, s = 0..N-1.
inline std::vector<cplx> periodic_grid_moments(const std::vector<double>& weights) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, weights);
    out.resize(weights.size());
    return out;
}

}  // namespace detail

/// 2^n atoms at theta = 2 pi k / 2^n with weight p^{w(k)} (1-p)^{n-w(k)},
/// w(k) the number of 1-bits of k.
inline AtomicMeasure bernoulli_discretize(double p, int level = default_bernoulli_level) {
    check_bernoulli_parameters(p, level);
    AtomicMeasure m;
    m.weights = detail::bernoulli_weights(p, level);
    const std::size_t n_atoms = m.weights.size();
    m.angles.resize(n_atoms);
    for (std::size_t k = 0; k < n_atoms; ++k) m.angles[k] = two_pi * static_cast<double>(k) / static_cast<double>(n_atoms);
    return m;
}

/// Truncated product prod_{m=1..n} ((1-p) + p e^{-2 pi i s 2^{-m}}).
inline cplx bernoulli_product_moment(double p, int level, std::int64_t s) {
    check_bernoulli_parameters(p, level);
    cplx prod = 1.0;
    for (int m = 1; m <= level; ++m) {
        const std::int64_t period = std::int64_t{1} << m;
        std::int64_t r = s % period;
        if (r < 0) r += period;
        const double phase = -two_pi * static_cast<double>(r) / static_cast<double>(period);
        prod *= (1.0 - p) + p * std::polar(1.0, phase);
    }
    return prod;
}

// ---------------------------------------------------------------------------
// moments

/// Fourier coefficients mu^(0..S). Negative indices follow from conjugation.
class MomentSequence {
public:
    MomentSequence() : coeffs_{cplx{1.0, 0.0}} {}

    /// Validates mu^(0) = 1 and |mu^(s)| <= 1 + 1e-12.
    explicit MomentSequence(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty() || coeffs_[0] != cplx{1.0, 0.0})
            throw ValidationError("moment sequence: mu^(0) must equal 1");
        for (std::size_t s = 1; s < coeffs_.size(); ++s)
            if (!(std::abs(coeffs_[s]) <= 1.0 + 1e-12))
                throw ValidationError("moment sequence: |mu^(" + std::to_string(s) + ")| exceeds 1");
    }

    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }

    /// mu^(s) for |s| <= order().
    cplx at(std::int64_t s) const {
        const std::int64_t a = s < 0 ? -s : s;
        if (a > order()) throw ArgumentError("moment index " + std::to_string(s) + " beyond truncation order");
        const cplx v = coeffs_[static_cast<std::size_t>(a)];
        return s < 0 ? std::conj(v) : v;
    }

    cplx operator[](std::int64_t s) const { return at(s); }

private:
    std::vector<cplx> coeffs_;
};

namespace detail {

inline MomentSequence periodic_extension(const std::vector<cplx>& period, int order) {
    const std::size_t n = period.size();
    std::vector<cplx> c(static_cast<std::size_t>(order) + 1);
    for (std::size_t s = 0; s < c.size(); ++s) c[s] = period[s % n];
    c[0] = 1.0;
    return MomentSequence(std::move(c));
}

inline std::vector<cplx> atomic_moments(const AtomicMeasure& m, int order) {
    std::vector<cplx> c(static_cast<std::size_t>(order) + 1);
    c[0] = 1.0;
    for (int s = 1; s <= order; ++s) {
        CompensatedComplexSum acc;
        for (std::size_t j = 0; j < m.angles.size(); ++j) {
            const double phase = std::fmod(static_cast<double>(s) * m.angles[j], two_pi);
            acc += std::polar(m.weights[j], -phase);
        }
        c[static_cast<std::size_t>(s)] = acc.value();
    }
    return c;
}

}  // namespace detail

/// mu^(0..S) of a validated measure. Density and Bernoulli measures live on
/// equispaced grids, so their moments are one FFT of the grid weights,
/// extended periodically.
inline MomentSequence moments(const SpectralMeasure& measure, int order) {
    if (order < 1) throw ArgumentError("moments: truncation order must be at least 1");
    validate(measure);
    return std::visit(
        [order](const auto& m) -> MomentSequence {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                return MomentSequence(detail::atomic_moments(m, order));
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                std::vector<double> w(m.values);
                const double inv = 1.0 / static_cast<double>(w.size());
                for (double& x : w) x *= inv;
                return detail::periodic_extension(detail::periodic_grid_moments(w), order);
            } else {
                return detail::periodic_extension(detail::periodic_grid_moments(detail::bernoulli_weights(m.p, m.level)),
                                                  order);
            }
        },
        measure);
}

/// The (m x m) Toeplitz matrix [mu^(a-b)].
inline CMatrix toeplitz_moment_matrix(const MomentSequence& mu, int m) {
    if (m < 1 || m - 1 > mu.order()) throw ArgumentError("toeplitz_moment_matrix: size exceeds truncation order");
    CMatrix t(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) t(a, b) = mu.at(a - b);
    return t;
}

// ---------------------------------------------------------------------------
// Poisson and Hilbert transforms

/// Poisson kernel (1 - r^2) / (1 + r^2 - 2 r cos x), with the denominator in
/// the cancellation-free form (1 - r)^2 + 4 r sin^2(x / 2).
inline double poisson_kernel(double r, double x) {
    const double h = std::sin(0.5 * x);
    return (1.0 - r) * (1.0 + r) / ((1.0 - r) * (1.0 - r) + 4.0 * r * h * h);
}

/// \int mu(dtheta) P_r(eta - theta) = 1 + 2 Re G(r e^{i eta}).
inline double poisson_value(const SpectralMeasure& measure, double r, double eta) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("poisson_value: radius must satisfy 0 <= r < 1");
    validate(measure);
    auto atomic_sum = [&](const AtomicMeasure& m) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < m.angles.size(); ++j) acc += m.weights[j] * poisson_kernel(r, eta - m.angles[j]);
        return acc.value();
    };
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                return atomic_sum(m);
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                CompensatedSum acc;
                for (std::size_t k = 0; k < m.mesh(); ++k) acc += m.values[k] * poisson_kernel(r, eta - m.grid_angle(k));
                return acc.value() / static_cast<double>(m.mesh());
            } else {
                return atomic_sum(bernoulli_discretize(m.p, m.level));
            }
        },
        measure);
}

/// Principal value (1/2) \int_{|eta - theta| >= delta} mu(dtheta) cot((eta - theta) / 2).
///
/// This is the boundary value of Im G. Density grids default to delta = one
/// grid step, which drops the grid point under eta (or the two neighbours of
/// an off-grid eta). Only grid angles give a faithful value for a density:
/// off the grid the sum sees the discrete grid measure, whose transform
/// oscillates like cot(M eta / 2). For atomic measures every atom must lie at distance
/// >= delta (default 1e-9); otherwise SingularityError names the atom.
inline double hilbert_transform(const SpectralMeasure& measure, double eta, std::optional<double> cutoff = {}) {
    if (cutoff && !(*cutoff > 0.0)) throw ArgumentError("hilbert_transform: cutoff must be positive");
    validate(measure);
    auto atomic_sum = [&](const AtomicMeasure& m) {
        const double delta = cutoff.value_or(1e-9);
        CompensatedSum acc;
        for (std::size_t j = 0; j < m.angles.size(); ++j) {
            const double d = angle_difference(eta, m.angles[j]);
            if (std::abs(d) < delta)
                throw SingularityError("hilbert_transform: evaluation point within cutoff of atom " + std::to_string(j), j);
            acc += 0.5 * m.weights[j] / std::tan(0.5 * d);
        }
        return acc.value();
    };
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                return atomic_sum(m);
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                const double step = two_pi / static_cast<double>(m.mesh());
                const double delta = cutoff.value_or(step) * (1.0 - 1e-9);
                CompensatedSum acc;
                for (std::size_t k = 0; k < m.mesh(); ++k) {
                    const double d = angle_difference(eta, m.grid_angle(k));
                    if (std::abs(d) < delta) continue;
                    acc += m.values[k] / std::tan(0.5 * d);
                }
                return 0.5 * acc.value() / static_cast<double>(m.mesh());
            } else {
                return atomic_sum(bernoulli_discretize(m.p, m.level));
            }
        },
        measure);
}

}  // namespace qtrap
