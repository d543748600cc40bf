#pragma once

// Finite-dimensional reference computations for trap currents: the trace
// formulas for a general trap 0 <= A <= 1, and a Krylov oracle that applies
// the sequential projections of the rank-1 current in Gram coordinates.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qtrap/errors.hpp"
#include "qtrap/linalg.hpp"
#include "qtrap/spectral_measure.hpp"

namespace qtrap {

class TrapSystem {
public:
    /// Validates unitarity of U (1e-12) and 0 <= A <= 1 (1e-10).
    TrapSystem(CMatrix unitary, CMatrix trap) : u_(std::move(unitary)), a_(std::move(trap)) {
        const auto n = u_.rows();
        if (n < 1 || u_.cols() != n || a_.rows() != n || a_.cols() != n)
            throw ValidationError("trap system: U and A must be square of equal dimension");
        if (unitarity_defect(u_) > 1e-12) throw ValidationError("trap system: U is not unitary");
        if (!is_unit_interval_operator(a_, 1e-10)) throw ValidationError("trap system: A violates 0 <= A <= 1");
    }

    Eigen::Index dim() const noexcept { return u_.rows(); }
    const CMatrix& unitary() const noexcept { return u_; }
    const CMatrix& trap() const noexcept { return a_; }
    CMatrix survival() const { return CMatrix::Identity(dim(), dim()) - a_; }

private:
    CMatrix u_;
    CMatrix a_;
};

/// Cyclic shift e_j -> e_{j+1 mod dim}.
inline CMatrix shift_unitary(Eigen::Index dim) {
    CMatrix u = CMatrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) u((j + 1) % dim, j) = 1.0;
    return u;
}

/// Haar-like unitary: QR of a seeded complex Gaussian matrix with the phases
/// of R's diagonal moved into Q.
inline CMatrix random_unitary(Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CMatrix z(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) z(i, j) = cplx(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
        const cplx d = r(j, j);
        if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    // one Newton-Schulz step pulls ||QQ* - 1|| to rounding level
    q = 0.5 * q * (3.0 * CMatrix::Identity(dim, dim) - q.adjoint() * q);
    return q;
}

/// A = sum_j p_j |psi_j><psi_j| for orthonormal columns psi_j.
inline CMatrix trap_from_vectors(const std::vector<double>& weights, const CMatrix& vectors) {
    if (static_cast<Eigen::Index>(weights.size()) != vectors.cols())
        throw ArgumentError("trap_from_vectors: one weight per vector required");
    CMatrix a = CMatrix::Zero(vectors.rows(), vectors.rows());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const CVector psi = vectors.col(static_cast<Eigen::Index>(j));
        a += weights[j] * psi * psi.adjoint();
    }
    return 0.5 * (a + a.adjoint());
}

/// A = sum_j p_j |e_{i_j}><e_{i_j}| on basis vectors.
inline CMatrix trap_from_basis(Eigen::Index dim, const std::vector<double>& weights, const std::vector<Eigen::Index>& indices) {
    if (weights.size() != indices.size()) throw ArgumentError("trap_from_basis: one weight per index required");
    CMatrix a = CMatrix::Zero(dim, dim);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (indices[j] < 0 || indices[j] >= dim) throw ArgumentError("trap_from_basis: index out of range");
        a(indices[j], indices[j]) += weights[j];
    }
    return a;
}

inline TrapSystem shift_system(Eigen::Index dim, Eigen::Index trap_site = 0) {
    return TrapSystem(shift_unitary(dim), trap_from_basis(dim, {1.0}, {trap_site}));
}

/// Seeded random U with a trap of the given eigenvalues on seeded random
/// orthonormal vectors.
inline TrapSystem random_system(Eigen::Index dim, std::uint64_t seed, const std::vector<double>& trap_weights) {
    if (static_cast<Eigen::Index>(trap_weights.size()) > dim) throw ArgumentError("random_system: trap rank exceeds dim");
    const CMatrix u = random_unitary(dim, seed);
    const CMatrix basis = random_unitary(dim, seed ^ 0x9e3779b97f4a7c15ULL);
    return TrapSystem(u, trap_from_vectors(trap_weights, basis.leftCols(static_cast<Eigen::Index>(trap_weights.size()))));
}

/// (TU)^t, with the empty product equal to 1.
inline CMatrix survival_power(const TrapSystem& sys, int t) {
    if (t < 0) throw ArgumentError("survival_power: t must be non-negative");
    const CMatrix step = sys.survival() * sys.unitary();
    CMatrix x = CMatrix::Identity(sys.dim(), sys.dim());
    for (int i = 0; i < t; ++i) x = step * x;
    return x;
}

/// N_A(t) = Tr(1 - (TU)^t (U*T)^t).
inline double trapped_number(const TrapSystem& sys, int t) {
    const CMatrix x = survival_power(sys, t);
    const CMatrix prod = x * x.adjoint();
    return (CMatrix::Identity(sys.dim(), sys.dim()) - prod).trace().real();
}

/// J_A(t) = Tr (TU)^{t-1} (1 - T^2) (U*T)^{t-1}.
inline double trap_current(const TrapSystem& sys, int t) {
    if (t < 1) throw ArgumentError("trap_current: t must be at least 1");
    const CMatrix y = survival_power(sys, t - 1);
    const CMatrix tt = sys.survival();
    const CMatrix loss = CMatrix::Identity(sys.dim(), sys.dim()) - tt * tt;
    return (y * loss * y.adjoint()).trace().real();
}

/// mu^(s) = <(U*)^s phi, phi> = phi^* U^s phi for s = 0..order.
inline MomentSequence moments_from_state(const CMatrix& unitary, const CVector& phi, int order) {
    if (order < 1) throw ArgumentError("moments_from_state: order must be at least 1");
    const double nrm = phi.norm();
    if (std::abs(nrm - 1.0) > 1e-12) throw ValidationError("moments_from_state: phi is not normalised");
    std::vector<cplx> c(static_cast<std::size_t>(order) + 1);
    c[0] = 1.0;
    CVector v = phi;
    for (int s = 1; s <= order; ++s) {
        v = unitary * v;
        c[static_cast<std::size_t>(s)] = phi.dot(v);  // Eigen's dot conjugates the left factor
    }
    return MomentSequence(std::move(c));
}

inline constexpr int max_gram_order = 256;

/// Toeplitz Gram matrix [mu^(a-b)] of the Krylov vectors (U*)^s phi.
class GramOracle {
public:
    GramOracle(MomentSequence mu, int t_max) : mu_(std::move(mu)), t_max_(t_max) {
        if (t_max_ < 1) throw ArgumentError("krylov oracle: t_max must be positive");
        if (t_max_ > max_gram_order)
            throw ResourceError("krylov oracle: t_max " + std::to_string(t_max_) + " exceeds " +
                                std::to_string(max_gram_order));
        if (mu_.order() < t_max_) throw ArgumentError("krylov oracle: moment order below t_max");
        gram_ = toeplitz_moment_matrix(mu_, t_max_ + 1);
        min_eigenvalue_ = hermitian_eigenvalues(gram_).minCoeff();
        if (min_eigenvalue_ < -1e-8)
            throw InvalidMomentsError("krylov oracle: Gram matrix has eigenvalue " + std::to_string(min_eigenvalue_));
    }

    const CMatrix& gram() const noexcept { return gram_; }
    int t_max() const noexcept { return t_max_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

    /// J(t) = ||(1 - P_{t-1}) ... (1 - P_1) phi||^2 for t = 1..t_max, index t - 1.
    /// Vectors are coefficient arrays over the Krylov vectors; no
    /// orthonormalisation is performed.
    std::vector<double> currents() const {
        const Eigen::Index n = gram_.rows();
        CVector c = CVector::Zero(n);
        c(0) = 1.0;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(t_max_));
        out.push_back(c.dot(gram_ * c).real());
        for (int s = 1; s < t_max_; ++s) {
            // P_s x = <v_s, x> v_s with <v_s, v_s> = mu^(0) = 1
            const cplx overlap = (gram_.row(s) * c).value();
            c(s) -= overlap;
            out.push_back(c.dot(gram_ * c).real());
        }
        return out;
    }

private:
    MomentSequence mu_;
    int t_max_;
    CMatrix gram_;
    double min_eigenvalue_ = 0.0;
};

inline std::vector<double> krylov_current(const MomentSequence& mu, int t_max) {
    return GramOracle(mu, t_max).currents();
}

}  // namespace qtrap
