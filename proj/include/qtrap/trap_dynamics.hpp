#pragma once

// Rank-1 trap |phi><phi|: the K-recursion, the currents J(t) and N(t), the
// boundary functions G and F = G / (1 + G) on circles inside the disk, the
// Abel-regularised current Jtilde(r), and the asymptotic current of an
// absolutely continuous trap measure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qtrap/errors.hpp"
#include "qtrap/spectral_measure.hpp"
#include "qtrap/summation.hpp"

namespace qtrap {

/// K(s), J(t), N(t) for s, t = 1..T, stored at index s - 1 / t - 1.
struct CurrentSeries {
    std::vector<cplx> K;
    std::vector<double> J;
    std::vector<double> N;

    int length() const noexcept { return static_cast<int>(J.size()); }
    double current(int t) const { return J.at(static_cast<std::size_t>(t - 1)); }
    double trapped(int t) const { return N.at(static_cast<std::size_t>(t - 1)); }
};

/// G and F = G / (1 + G) at z = r e^{i eta_k}, eta_k = 2 pi k / M.
struct DiskSample {
    double r = 0.0;
    std::vector<double> mesh;
    std::vector<cplx> G;
    std::vector<cplx> F;
};

/// Moment order S with r^S / (1 - r) <= 1e-12, so the truncated series for G
/// is within 1e-12 of the full one.
inline int truncation_order(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("truncation_order: radius must satisfy 0 <= r < 1");
    if (r == 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(1e12 / (1.0 - r)) / std::log(1.0 / r))));
}

/// Number of K terms with r^{2T} <= 1e-14.
inline int series_length(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("series_length: radius must satisfy 0 <= r < 1");
    if (r == 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(1e-14) / (2.0 * std::log(r)))));
}

/// Smallest power-of-two mesh (at least 2^13) with r^M <= 1e-12. On such a
/// mesh the trapezoid rule for |F|^2 matches Parseval to ~1e-12.
inline int parseval_mesh(double r) {
    int mesh = 8192;
    if (r == 0.0) return mesh;
    const double needed = std::log(1e12) / std::log(1.0 / r);
    while (static_cast<double>(mesh) < needed) mesh *= 2;
    return mesh;
}

/// K(1) = mu^(1), K(t+1) = mu^(t+1) - sum_{s=1..t} mu^(t-s+1) K(s).
/// Result index s - 1 holds K(s).
inline std::vector<cplx> k_sequence(const MomentSequence& mu, int T) {
    if (T < 1) throw ArgumentError("k_sequence: T must be positive");
    if (mu.order() < T)
        throw ArgumentError("k_sequence: moment order " + std::to_string(mu.order()) + " is below T = " +
                            std::to_string(T));
    const auto& m = mu.coeffs();
    std::vector<cplx> K(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {  // computes K(t+1)
        cplx acc = m[static_cast<std::size_t>(t) + 1];
        for (int s = 1; s <= t; ++s) acc -= m[static_cast<std::size_t>(t - s + 1)] * K[static_cast<std::size_t>(s - 1)];
        K[static_cast<std::size_t>(t)] = acc;
    }
    return K;
}

/// J(1) = 1, J(t) = 1 - sum_{s<t} |K(s)|^2, N(t) = sum_{s<=t} J(s).
inline CurrentSeries current_series(const std::vector<cplx>& K, int T) {
    if (T < 1) throw ArgumentError("current_series: T must be positive");
    if (static_cast<int>(K.size()) < T - 1)
        throw ArgumentError("current_series: need at least T - 1 values of K");
    CurrentSeries out;
    out.K.assign(K.begin(), K.begin() + std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(K.size()), T));
    out.J.resize(static_cast<std::size_t>(T));
    out.N.resize(static_cast<std::size_t>(T));
    CompensatedSum absorbed;
    CompensatedSum trapped;
    for (int t = 1; t <= T; ++t) {
        if (t >= 2) absorbed += std::norm(K[static_cast<std::size_t>(t - 2)]);
        const double j = t == 1 ? 1.0 : 1.0 - absorbed.value();
        trapped += j;
        out.J[static_cast<std::size_t>(t - 1)] = j;
        out.N[static_cast<std::size_t>(t - 1)] = trapped.value();
    }
    return out;
}

inline CurrentSeries current_series(const MomentSequence& mu, int T) { return current_series(k_sequence(mu, T), T); }

/// Samples G(z) = sum_{s>=1} z^s mu^(s) on |z| = r. The coefficients r^s mu^(s)
/// are folded modulo M, which is exact at the mesh points, and summed with one
/// length-M FFT.
inline DiskSample g_on_circle(const MomentSequence& mu, double r, int mesh) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("g_on_circle: radius must satisfy 0 <= r < 1");
    if (mesh < 1) throw ArgumentError("g_on_circle: mesh must be positive");
    const int required = truncation_order(r);
    if (mu.order() < required)
        throw ArgumentError("g_on_circle: radius " + std::to_string(r) + " needs moment order S >= " +
                            std::to_string(required) + ", got " + std::to_string(mu.order()));

    const std::size_t M = static_cast<std::size_t>(mesh);
    std::vector<cplx> folded(M, cplx{0.0, 0.0});
    const auto& m = mu.coeffs();
    for (std::size_t s = 1; s < m.size(); ++s) {
        const double rs = std::pow(r, static_cast<double>(s));
        if (rs == 0.0) break;
        folded[s % M] += std::conj(rs * m[s]);
    }
    Eigen::FFT<double> fft;
    std::vector<cplx> spectrum;
    fft.fwd(spectrum, folded);

    DiskSample out;
    out.r = r;
    out.mesh.resize(M);
    out.G.resize(M);
    out.F.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        out.mesh[k] = two_pi * static_cast<double>(k) / static_cast<double>(M);
        out.G[k] = std::conj(spectrum[k]);
        out.F[k] = out.G[k] / (1.0 + out.G[k]);
    }
    return out;
}

/// Jtilde(r) = 1 - sum_{s>=1} r^{2s} |K(s)|^2; K index s - 1 holds K(s).
inline double jtilde_series(const std::vector<cplx>& K, double r) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("jtilde_series: radius must satisfy 0 <= r < 1");
    const int needed = series_length(r);
    if (static_cast<int>(K.size()) < needed)
        throw ArgumentError("jtilde_series: radius " + std::to_string(r) + " needs " + std::to_string(needed) +
                            " values of K, got " + std::to_string(K.size()));
    CompensatedSum acc;
    const double r2 = r * r;
    for (std::size_t s = 0; s < K.size(); ++s) {
        const double w = std::pow(r2, static_cast<double>(s + 1));
        if (w == 0.0) break;
        acc += w * std::norm(K[s]);
    }
    return 1.0 - acc.value();
}

/// Mesh average of 1 - |F|^2 = (1 + 2 Re G) / |1 + G|^2 on |z| = r. Without
/// the imaginary part the integrand becomes (1 + 2 Re G) / (1 + Re G)^2, an
/// upper bound for the true one.
inline double jtilde_integral(const MomentSequence& mu, double r, int mesh, bool include_imaginary) {
    const DiskSample sample = g_on_circle(mu, r, mesh);
    CompensatedSum acc;
    for (const cplx& g : sample.G) {
        const double num = 1.0 + 2.0 * g.real();
        if (include_imaginary) {
            acc += num / std::norm(1.0 + g);
        } else {
            const double den = 1.0 + g.real();
            acc += num / (den * den);
        }
    }
    return acc.value() / static_cast<double>(sample.G.size());
}

namespace detail {

/// (H rho)(theta_k) on the density grid with the grid point under theta_k
/// excluded; matches hilbert_transform with its default cutoff.
inline std::vector<double> density_hilbert_on_grid(const DensityMeasure& m) {
    const std::size_t M = m.mesh();
    std::vector<double> cot_table(M, 0.0);
    for (std::size_t j = 1; j < M; ++j) cot_table[j] = 1.0 / std::tan(std::numbers::pi * static_cast<double>(j) / static_cast<double>(M));
    std::vector<double> h(M);
    for (std::size_t k = 0; k < M; ++k) {
        CompensatedSum acc;
        for (std::size_t j = 1; j < M; ++j) acc += m.values[(k + M - j) % M] * cot_table[j];
        h[k] = 0.5 * acc.value() / static_cast<double>(M);
    }
    return h;
}

}  // namespace detail

/// J_inf = (1/2pi) \int 4 rho / ((1 + rho)^2 + 4 (H rho)^2) for a density
/// measure, with H the boundary value of Im G.
inline double asymptotic_current_ac(const SpectralMeasure& measure) {
    const auto* density = std::get_if<DensityMeasure>(&measure);
    if (density == nullptr) throw ArgumentError("asymptotic_current_ac: requires a density measure");
    validate(*density);
    const std::vector<double> h = detail::density_hilbert_on_grid(*density);
    CompensatedSum acc;
    for (std::size_t k = 0; k < density->mesh(); ++k) {
        const double rho = density->values[k];
        acc += 4.0 * rho / ((1.0 + rho) * (1.0 + rho) + 4.0 * h[k] * h[k]);
    }
    return acc.value() / static_cast<double>(density->mesh());
}

// ---------------------------------------------------------------------------
// r-ladder scans

struct LadderPoint {
    double r = 0.0;
    double one_minus_r = 0.0;
    double jtilde_true = 0.0;
    double jtilde_no_im = 0.0;
};

/// r = 1 - 2^{-k}, k = k_min..k_max.
inline std::vector<double> dyadic_ladder(int k_min = 3, int k_max = 10) {
    if (k_min < 1 || k_max < k_min || k_max > 40) throw ArgumentError("dyadic_ladder: need 1 <= k_min <= k_max <= 40");
    std::vector<double> rs;
    for (int k = k_min; k <= k_max; ++k) rs.push_back(1.0 - std::ldexp(1.0, -k));
    return rs;
}

/// Moment order sufficient for every radius of the ladder.
inline int ladder_order(const std::vector<double>& ladder) {
    int order = 1;
    for (double r : ladder) order = std::max(order, truncation_order(r));
    return order;
}

inline LadderPoint jtilde_point(const MomentSequence& mu, double r, int mesh) {
    return LadderPoint{r, 1.0 - r, jtilde_integral(mu, r, mesh, true), jtilde_integral(mu, r, mesh, false)};
}

}  // namespace qtrap
