#pragma once

// Random model generators and small independent oracles shared by the tests.

#include "edgeshift/edgeshift.hpp"

#include <random>

namespace edgeshift::testing {

inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random Hermitian finite-range operator: every (k, k', cell offset) pair is
/// populated with probability `density`, mirrored to keep H0 Hermitian.
inline HoppingOperator random_hopping(std::mt19937_64& rng, int d, int n, double density = 0.5, bool real = false) {
    LatticeGeometry g(d, n);
    HoppingOperator::Table t;
    int offsets = 1;
    for (int i = 0; i < d; ++i) offsets *= 3;
    for (int k = 0; k < g.cell_size(); ++k)
        for (int o = 0; o < offsets; ++o) {
            std::vector<int> m(d);
            int rest = o;
            for (int i = d - 1; i >= 0; --i) {
                m[i] = (rest % 3 - 1) * n;
                rest /= 3;
            }
            for (int kp = 0; kp < g.cell_size(); ++kp) {
                if (uniform(rng, 0.0, 1.0) > density) continue;
                std::vector<int> mm(d);
                for (int i = 0; i < d; ++i) mm[i] = -m[i];
                const bool self = kp == k && m == mm;
                const cplx v(uniform(rng), (real || self) ? 0.0 : uniform(rng));
                t[HopKey{k, kp, m}] = v;
                t[HopKey{kp, k, mm}] = std::conj(v);
            }
        }
    // Guarantee a hop away from site 0 so the operator is nontrivial.
    std::vector<int> e(d, 0);
    e[0] = n;
    const cplx w(uniform(rng, 0.2, 1.0), 0.0);
    t[HopKey{0, 0, e}] = w;
    std::vector<int> me(d, 0);
    me[0] = -n;
    t[HopKey{0, 0, me}] = std::conj(w);
    return HoppingOperator(g, std::move(t));
}

inline SingleCellPotential random_potential(std::mt19937_64& rng, int size, bool real = false) {
    CMatrix m(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) m(i, j) = cplx(uniform(rng), real ? 0.0 : uniform(rng));
    return SingleCellPotential(0.5 * (m + m.adjoint()).eval());
}

/// Hermitian part recomputed exactly so that V == V^* bitwise.
inline SingleCellPotential exact_hermitian(const CMatrix& m) {
    CMatrix h = m;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        h(i, i) = h(i, i).real();
        for (Eigen::Index j = i + 1; j < h.cols(); ++j) h(j, i) = std::conj(h(i, j));
    }
    return SingleCellPotential(h);
}

/// Brute-force minimum of lambda_min over a uniform grid of the zone.
inline double brute_zone_min(const HoppingOperator& h, int per_dim) {
    const int d = h.geometry().dimension();
    const double zone = h.geometry().zone_length();
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= per_dim;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < total; ++f) {
        Theta t(d);
        std::size_t rest = f;
        for (int i = d - 1; i >= 0; --i) {
            t[i] = zone * static_cast<double>(rest % per_dim) / per_dim;
            rest /= per_dim;
        }
        best = std::min(best, lambda_min(h, t));
    }
    return best;
}

/// Hand-derived 3x3 quartic fiber in the conjugate convention, with the (3,1)
/// entry written as the conjugate of (1,3) so that the matrix is Hermitian.
inline CMatrix closed_form_quartic_matrix(double theta) {
    const cplx em = std::polar(1.0, -3.0 * theta), ep = std::polar(1.0, 3.0 * theta);
    CMatrix m(3, 3);
    m << 6.0, -4.0 + em, 1.0 - 4.0 * em,
        -4.0 + ep, 6.0, -4.0 + em,
        std::conj(1.0 - 4.0 * em), -4.0 + ep, 6.0;
    return m;
}

}  // namespace edgeshift::testing
