#pragma once

// Entropy of gauge-invariant quasi-free Fermion states in terms of their
// one-particle symbols, and the refined-partition entropy of a trap.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qtrap/errors.hpp"
#include "qtrap/linalg.hpp"

namespace qtrap {

/// eta(x) = -x log x, eta(0) = eta(1) = 0. Inputs within 1e-10 of [0, 1]
/// are clamped.
inline double eta(double x) {
    if (!(x >= -1e-10 && x <= 1.0 + 1e-10)) throw ArgumentError("eta: argument " + std::to_string(x) + " outside [0, 1]");
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log(x);
}

/// eta(x) + eta(1 - x).
inline double binary_entropy(double x) { return eta(x) + eta(1.0 - x); }

/// One-particle symbol 0 <= Q <= 1.
class Symbol {
public:
    explicit Symbol(CMatrix q) : q_(std::move(q)) {
        if (q_.rows() != q_.cols()) throw ValidationError("symbol: matrix must be square");
        if (!is_unit_interval_operator(q_, 1e-10)) throw ValidationError("symbol: spectrum outside [0, 1]");
        q_ = 0.5 * (q_ + q_.adjoint());
    }

    static Symbol homogeneous(Eigen::Index dim, double kappa) {
        return Symbol(kappa * CMatrix::Identity(dim, dim));
    }

    const CMatrix& matrix() const noexcept { return q_; }
    Eigen::Index dim() const noexcept { return q_.rows(); }

private:
    CMatrix q_;
};

/// S(omega_Q) = Tr(eta(Q) + eta(1 - Q)), in nats.
inline double state_entropy(const Symbol& q) {
    const RVector ev = hermitian_eigenvalues(q.matrix());
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += binary_entropy(std::clamp(ev(i), 0.0, 1.0));
    return s;
}

namespace detail {

struct PurificationBlocks {
    CMatrix root;       // sqrt(Q(1 - Q)) on H
    CMatrix auxiliary;  // orthonormal basis of K = range of Q(1 - Q), as columns
};

inline PurificationBlocks purification_blocks(const Symbol& q) {
    const HermitianEigen eig = jacobi_eigh(q.matrix());
    PurificationBlocks out;
    out.root = hermitian_function(eig, [](double x) {
        const double c = std::clamp(x, 0.0, 1.0);
        return std::sqrt(c * (1.0 - c));
    });
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        const double c = std::clamp(eig.values(i), 0.0, 1.0);
        if (c * (1.0 - c) > 1e-12) keep.push_back(i);
    }
    out.auxiliary.resize(q.dim(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.auxiliary.col(static_cast<Eigen::Index>(j)) = eig.vectors.col(keep[j]);
    return out;
}

}  // namespace detail

/// Projector on H + K restricting to Q on H, where K is the span of the
/// eigenvectors of Q(1 - Q) with eigenvalue above 1e-12.
inline Symbol purify(const Symbol& q) {
    const auto blocks = detail::purification_blocks(q);
    const Eigen::Index d = q.dim();
    const Eigen::Index k = blocks.auxiliary.cols();
    const CMatrix& e = blocks.auxiliary;
    CMatrix p(d + k, d + k);
    p.topLeftCorner(d, d) = q.matrix();
    p.topRightCorner(d, k) = blocks.root * e;
    p.bottomLeftCorner(k, d) = e.adjoint() * blocks.root;
    p.bottomRightCorner(k, k) = e.adjoint() * (CMatrix::Identity(d, d) - q.matrix()) * e;
    return Symbol(0.5 * (p + p.adjoint()));
}

/// Symbol R of the partition determined by (V, W) acting on the purified
/// state of Q:
///   R = [ V*QV + W          V* sqrt(Q(1-Q)) ]
///       [ sqrt(Q(1-Q)) V    (1 - Q)         ]   restricted to K in the second slot.
inline Symbol partition_symbol(const Symbol& q, const CMatrix& v, const CMatrix& w) {
    const Eigen::Index d = q.dim();
    if (v.rows() != d || v.cols() != d || w.rows() != d || w.cols() != d)
        throw ArgumentError("partition_symbol: V and W must match the symbol dimension");
    const CMatrix slack = CMatrix::Identity(d, d) - v.adjoint() * v;
    if (hermiticity_defect(w) > 1e-10) throw ArgumentError("partition_symbol: W is not Hermitian");
    const RVector w_ev = hermitian_eigenvalues(0.5 * (w + w.adjoint()));
    const RVector gap_ev = hermitian_eigenvalues(0.5 * ((slack - w) + (slack - w).adjoint()));
    if (w_ev.minCoeff() < -1e-10 || gap_ev.minCoeff() < -1e-10)
        throw ArgumentError("partition_symbol: requires 0 <= W <= 1 - V*V");

    const auto blocks = detail::purification_blocks(q);
    const Eigen::Index k = blocks.auxiliary.cols();
    const CMatrix& e = blocks.auxiliary;
    CMatrix r(d + k, d + k);
    r.topLeftCorner(d, d) = v.adjoint() * q.matrix() * v + w;
    r.topRightCorner(d, k) = v.adjoint() * blocks.root * e;
    r.bottomLeftCorner(k, d) = e.adjoint() * blocks.root * v;
    r.bottomRightCorner(k, k) = e.adjoint() * (CMatrix::Identity(d, d) - q.matrix()) * e;
    return Symbol(0.5 * (r + r.adjoint()));
}

/// D_t = 1 - V_t* V_t with V_t = (VU)^t U^{-t}.
inline CMatrix evolved_defect(const CMatrix& u, const CMatrix& v, int t) {
    const Eigen::Index d = u.rows();
    if (t < 1) throw ArgumentError("evolved_defect: t must be at least 1");
    if (u.cols() != d || v.rows() != d || v.cols() != d) throw ArgumentError("evolved_defect: dimension mismatch");
    if (unitarity_defect(u) > 1e-12) throw ValidationError("evolved_defect: U is not unitary");
    const RVector vv = hermitian_eigenvalues(v.adjoint() * v);
    if (vv.maxCoeff() > 1.0 + 1e-10) throw ValidationError("evolved_defect: V is not a contraction");

    const CMatrix step = v * u;
    CMatrix vt = CMatrix::Identity(d, d);
    for (int i = 0; i < t; ++i) vt = step * vt;
    CMatrix u_inv_t = CMatrix::Identity(d, d);
    for (int i = 0; i < t; ++i) u_inv_t = u.adjoint() * u_inv_t;
    vt = vt * u_inv_t;
    const CMatrix defect = CMatrix::Identity(d, d) - vt.adjoint() * vt;
    return 0.5 * (defect + defect.adjoint());
}

struct EntropyReport {
    int t = 0;
    double kappa = 0.0;
    std::vector<double> defect_spectrum;  // eigenvalues of D_t above 1e-12, ascending
    double trace_defect = 0.0;
    double h_exact = 0.0;  // nats
    double h_lower = 0.0;  // nats
};

/// H = sum_d [eta(1 - kappa d) + eta(kappa d)] over the defect spectrum, and
/// the concavity bound [eta(kappa) + eta(1 - kappa)] Tr D.
inline EntropyReport refined_entropy_from_spectrum(double kappa, const std::vector<double>& spectrum, double trace,
                                                   int t = 0) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw ArgumentError("refined_entropy: kappa must lie strictly between 0 and 1");
    EntropyReport rep;
    rep.t = t;
    rep.kappa = kappa;
    rep.trace_defect = trace;
    double h = 0.0;
    for (double d : spectrum) {
        if (!(d >= -1e-10 && d <= 1.0 + 1e-10)) throw ValidationError("refined_entropy: defect eigenvalue outside [0, 1]");
        const double c = std::clamp(d, 0.0, 1.0);
        h += eta(1.0 - kappa * c) + eta(kappa * c);
        if (c > 1e-12) rep.defect_spectrum.push_back(c);
    }
    rep.h_exact = h;
    rep.h_lower = binary_entropy(kappa) * trace;
    return rep;
}

inline EntropyReport refined_entropy(double kappa, const CMatrix& defect, int t = 0) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw ArgumentError("refined_entropy: kappa must lie strictly between 0 and 1");
    const RVector ev = hermitian_eigenvalues(defect);
    std::vector<double> spectrum(ev.data(), ev.data() + ev.size());
    return refined_entropy_from_spectrum(kappa, spectrum, defect.trace().real(), t);
}

}  // namespace qtrap
