#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qtrap/errors.hpp"

namespace qtrap {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

struct HermitianEigen {
    RVector values;   // ascending
    CMatrix vectors;  // columns, same order as values
};

namespace detail {

inline double off_diagonal_norm(const CMatrix& a) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
///
/// Each pivot (p, q) is first rotated to a real off-diagonal entry by a
/// diagonal phase, then annihilated with a real Givens rotation. Pivots are
/// visited row-major, so the result is deterministic. Iterates until the
/// off-diagonal Frobenius norm drops below `tol * max(1, ||A||_F)`.
inline HermitianEigen jacobi_eigh(CMatrix a, double tol = 1e-12, int max_sweeps = 30) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw ArgumentError("jacobi_eigh: matrix must be square");
    if (n > 0 && (a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw ValidationError("jacobi_eigh: matrix is not Hermitian");

    CMatrix v = CMatrix::Identity(n, n);
    const double scale = std::max(1.0, a.norm());

    bool converged = detail::off_diagonal_norm(a) <= tol * scale;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const cplx phase = apq / mag;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                // W = diag(1, conj(phase)) * [[c, s], [-s, c]]
                const cplx w_pp = c;
                const cplx w_pq = s;
                const cplx w_qp = -s * std::conj(phase);
                const cplx w_qq = c * std::conj(phase);

                for (Eigen::Index k = 0; k < n; ++k) {  // a <- a W
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = akp * w_pp + akq * w_qp;
                    a(k, q) = akp * w_pq + akq * w_qq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {  // a <- W* a
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = std::conj(w_pp) * apk + std::conj(w_qp) * aqk;
                    a(q, k) = std::conj(w_pq) * apk + std::conj(w_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();

                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = vkp * w_pp + vkq * w_qp;
                    v(k, q) = vkp * w_pq + vkq * w_qq;
                }
            }
        }
        converged = detail::off_diagonal_norm(a) <= tol * scale;
    }
    if (!converged) throw ConvergenceError("jacobi_eigh: no convergence within sweep cap");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });

    HermitianEigen out{RVector(n), CMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        out.values(i) = a(src, src).real();
        out.vectors.col(i) = v.col(src);
    }
    return out;
}

inline RVector hermitian_eigenvalues(const CMatrix& a) { return jacobi_eigh(a).values; }

/// f(A) for Hermitian A through its eigendecomposition.
template <class F>
CMatrix hermitian_function(const HermitianEigen& eig, F&& f) {
    RVector fv(eig.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(eig.values(i));
    return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

inline double unitarity_defect(const CMatrix& u) {
    return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// True when a is Hermitian with spectrum inside [-tol, 1 + tol].
inline bool is_unit_interval_operator(const CMatrix& a, double tol = 1e-10) {
    if (a.rows() != a.cols() || hermiticity_defect(a) > tol) return false;
    if (a.rows() == 0) return true;
    const RVector ev = hermitian_eigenvalues(0.5 * (a + a.adjoint()));
    return ev.minCoeff() >= -tol && ev.maxCoeff() <= 1.0 + tol;
}

}  // namespace qtrap
