#pragma once

// Smallest eigenpair of a large sparse Hermitian matrix by a restarted
// Rayleigh-Ritz iteration: the search space grows by the residual of the
// current lowest Ritz vector and is compressed to the lowest Ritz vectors
// when it reaches its size limit.

#include "edgeshift/core.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <limits>

namespace edgeshift {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct LanczosOptions {
    int max_basis = 120;
    int keep = 8;
    int max_restarts = 2000;
    /// Certified residual |A y - lambda y| <= rel_tol * |A|.
    double rel_tol = 1e-10;
};

struct SmallestEigen {
    double value = 0.0;
    CVector vector;
    double residual = 0.0;
    double norm_bound = 0.0;
    int iterations = 0;
};

/// Max absolute row sum; bounds the spectral norm from above.
inline double gershgorin_bound(const SparseC& a) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
        double s = 0.0;
        for (SparseC::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
        worst = std::max(worst, s);
    }
    return worst;
}

namespace detail {

/// Orthogonalizes x against the first `cols` columns of q twice (CGS2);
/// returns the remaining norm.
inline double cgs2(const CMatrix& q, Eigen::Index cols, CVector& x) {
    for (int pass = 0; pass < 2; ++pass) {
        if (cols == 0) break;
        const CVector c = q.leftCols(cols).adjoint() * x;
        x -= q.leftCols(cols) * c;
    }
    return x.norm();
}

}  // namespace detail

inline SmallestEigen smallest_eigenpair(const SparseC& a, std::uint64_t seed = 1, const LanczosOptions& opt = {}) {
    const Eigen::Index n = a.rows();
    if (n != a.cols() || n == 0) throw std::invalid_argument("smallest_eigenpair: matrix must be square and nonempty");
    if (opt.keep < 1 || opt.max_basis <= opt.keep + 1) throw std::invalid_argument("smallest_eigenpair: bad basis sizes");
    SmallestEigen out;
    out.norm_bound = gershgorin_bound(a);
    const double tol = opt.rel_tol * std::max(out.norm_bound, std::numeric_limits<double>::min());

    const Eigen::Index m = std::min<Eigen::Index>(opt.max_basis, n);
    CMatrix q(n, m), aq(n, m);
    Eigen::Index cols = 0;

    // Deterministic start vector.
    CVector x(n);
    std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        x(i) = cplx(static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5, 0.0);
    }
    x.normalize();

    for (int it = 0; it < opt.max_restarts * opt.max_basis; ++it) {
        if (detail::cgs2(q, cols, x) <= 1e-14) {
            // Breakdown: the space is invariant. Restart from a fresh direction.
            x = CVector::Zero(n);
            x(it % n) = 1.0;
            if (detail::cgs2(q, cols, x) <= 1e-14) {
                if (cols == n) break;
                continue;
            }
        }
        q.col(cols) = x.normalized();
        aq.col(cols) = a * q.col(cols);
        ++cols;

        const CMatrix t = q.leftCols(cols).adjoint() * aq.leftCols(cols);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (t + t.adjoint()));
        if (es.info() != Eigen::Success) throw ConvergenceError("smallest_eigenpair: projected eigensolver failed");
        const double theta = es.eigenvalues()(0);
        const CVector y = es.eigenvectors().col(0);
        CVector ritz = q.leftCols(cols) * y;
        CVector r = aq.leftCols(cols) * y - theta * ritz;
        const double res = r.norm();
        out.iterations = it + 1;
        if (res <= tol || cols == n) {
            ritz.normalize();
            const CVector true_r = a * ritz - theta * ritz;
            out.value = theta;
            out.residual = true_r.norm();
            out.vector = std::move(ritz);
            if (out.residual <= tol) return out;
        }
        if (cols == m) {
            const Eigen::Index k = std::min<Eigen::Index>(opt.keep, cols - 1);
            const CMatrix yk = es.eigenvectors().leftCols(k);
            CMatrix qn = q.leftCols(cols) * yk;
            CMatrix aqn = aq.leftCols(cols) * yk;
            q.leftCols(k) = qn;
            aq.leftCols(k) = aqn;
            cols = k;
        }
        x = std::move(r);
    }
    throw ConvergenceError("smallest_eigenpair: residual did not reach " + format_double(tol));
}

}  // namespace edgeshift
