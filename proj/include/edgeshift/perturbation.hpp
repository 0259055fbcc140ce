#pragma once

// Degenerate perturbation theory at a minimizing quasi-momentum: the matrix
// A_ij = <psi_i, V psi_j> on the ground space, the first- and second-order
// edge coefficients for both sign regimes, and the resulting upper bounds.

#include "edgeshift/floquet.hpp"

#include <Eigen/LU>

#include <random>

namespace edgeshift {

struct PerturbationMatrix {
    CMatrix A;
    /// Eigenvalues P_1 <= ... <= P_p of A.
    RVector P;
    /// Rotated ground basis with <V psi_i, psi_j> = P_i delta_ij.
    CMatrix basis;
};

inline PerturbationMatrix perturbation_matrix(const GroundSpaceData& g, const SingleCellPotential& v) {
    if (v.size() != g.cell_size()) throw std::invalid_argument("perturbation_matrix: V does not match the cell");
    PerturbationMatrix out;
    out.A = g.basis.adjoint() * v.matrix() * g.basis;
    const CMatrix herm = 0.5 * (out.A + out.A.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
    if (es.info() != Eigen::Success) throw ConvergenceError("perturbation_matrix: eigensolver did not converge");
    out.P = es.eigenvalues();
    out.basis = g.basis * es.eigenvectors();
    for (Eigen::Index j = 0; j < out.basis.cols(); ++j) fix_phase(out.basis.col(j));
    return out;
}

enum class Subspace { FullV0, V01 };

enum class EdgeCase { Linear, Quadratic, NoMotion };

inline std::string to_string(EdgeCase c) {
    switch (c) {
        case EdgeCase::Linear: return "Linear";
        case EdgeCase::Quadratic: return "Quadratic";
        case EdgeCase::NoMotion: return "NoMotion";
    }
    return "unknown";
}

/// Zero threshold for A1, P1 and A2: tol_case_rel * (1 + ||V|| max(|s-|, |s+|)).
inline double case_tolerance(const SingleCellPotential& v, const DisorderSupport& s, const Tolerances& tol = {}) {
    return tol.tol_case_rel * (1.0 + v.norm() * s.max_abs());
}

/// A1 = min(s+ P_1, s- P_p) for sign-changing couplings.
inline double coeff_A1(const PerturbationMatrix& pm, const DisorderSupport& s) {
    if (s.regime != Regime::SignChanging) throw std::invalid_argument("coeff_A1: requires the sign-changing regime");
    if (pm.P.size() == 0) throw std::invalid_argument("coeff_A1: empty ground space");
    return std::min(s.s_plus * pm.P(0), s.s_minus * pm.P(pm.P.size() - 1));
}

namespace detail {

inline double second_order_prefactor(const DisorderSupport& s) {
    return s.regime == Regime::SignChanging ? std::max(s.s_minus * s.s_minus, s.s_plus * s.s_plus) : s.s_plus * s.s_plus;
}

/// Columns of the diagonalizing basis spanning the requested subspace.
inline CMatrix subspace_basis(const PerturbationMatrix& pm, Subspace which, double tol) {
    if (which == Subspace::FullV0) return pm.basis;
    Eigen::Index n = 0;
    while (n < pm.P.size() && pm.P(n) - pm.P(0) <= tol) ++n;
    return pm.basis.leftCols(n);
}

inline void require_gap(const GroundSpaceData& g) {
    if (g.gap && *g.gap <= g.tol_deg)
        throw Error("second-order coefficient: spectral gap " + format_double(*g.gap) +
                    " is below the degeneracy tolerance, pseudoinverse is ill-posed");
}

}  // namespace detail

/// Eigenvalue clustering width used to form V01 (eigenspace of A at P_1).
inline double v01_tolerance(const SingleCellPotential& v, const Tolerances& tol = {}) { return tol.deg(v.norm()); }

/// -c^2 lambda_max(B* V R V B), R = pseudoinverse of H0(theta) - E0 on the
/// orthogonal complement of the ground space, B spanning V0 or V01.
inline double coeff_A2(const GroundSpaceData& g, const PerturbationMatrix& pm, const SingleCellPotential& v,
                       const DisorderSupport& s, Subspace which = Subspace::FullV0, const Tolerances& tol = {}) {
    if (g.p == g.cell_size()) return 0.0;
    detail::require_gap(g);
    const Eigen::Index rest = g.cell_size() - g.p;
    const CMatrix excited = g.eigenvectors.rightCols(rest);
    const RVector inv_levels = (g.eigenvalues.tail(rest).array() - g.ground_energy()).inverse().matrix();
    const CMatrix b = detail::subspace_basis(pm, which, v01_tolerance(v, tol));
    const CMatrix coupling = excited.adjoint() * v.matrix() * b;  // <phi_j, V psi>
    const CMatrix m = coupling.adjoint() * inv_levels.asDiagonal() * coupling;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double top = std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1));
    return -detail::second_order_prefactor(s) * top;
}

/// The variational route did not reach a fixed point.
class VariationalNonConvergence : public ConvergenceError {
public:
    VariationalNonConvergence(const std::string& what, double best) : ConvergenceError(what), best_value(best) {}
    double best_value;
};

/// Estimates -c^2 sup_psi sup_phi |<psi, V phi>|^2 / <H0 phi, phi> by
/// alternating maximization from `seeds` random starts. The phi-step solves
/// (H0 - E0 + P0) x = Q V psi by LU, so it shares no spectral data with coeff_A2.
inline double coeff_A2_variational(const GroundSpaceData& g, const PerturbationMatrix& pm, const SingleCellPotential& v,
                                   const DisorderSupport& s, Subspace which = Subspace::FullV0, int iters = 20000,
                                   int seeds = 8, std::uint64_t seed = 1, const Tolerances& tol = {}) {
    if (g.p == g.cell_size()) return 0.0;
    detail::require_gap(g);
    const Eigen::Index n = g.cell_size();
    const CMatrix b = detail::subspace_basis(pm, which, v01_tolerance(v, tol));
    const CMatrix p0 = g.basis * g.basis.adjoint();
    const CMatrix q = CMatrix::Identity(n, n) - p0;
    const CMatrix shifted = g.fiber - g.ground_energy() * CMatrix::Identity(n, n);
    const Eigen::PartialPivLU<CMatrix> lu(shifted + p0);
    const CMatrix& vm = v.matrix();

    auto value_of = [&](const CVector& psi, const CVector& phi) {
        const double denom = (phi.adjoint() * shifted * phi)(0, 0).real();
        if (denom <= 0.0) return 0.0;
        return std::norm((psi.adjoint() * vm * phi)(0, 0)) / denom;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double best = 0.0;
    for (int start = 0; start < seeds; ++start) {
        CVector coeffs(b.cols());
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs(i) = cplx(normal(rng), normal(rng));
        CVector psi = b * coeffs.normalized();
        double value = -1.0;
        bool converged = false;
        for (int it = 0; it < iters; ++it) {
            CVector phi = q * lu.solve(q * (vm * psi));
            if (phi.norm() == 0.0) {
                value = 0.0;
                converged = true;
                break;
            }
            phi.normalize();
            CVector next = b * (b.adjoint() * (vm * phi));
            if (next.norm() == 0.0) {
                value = 0.0;
                converged = true;
                break;
            }
            psi = next.normalized();
            const CVector phi_opt = q * lu.solve(q * (vm * psi));
            const double updated = phi_opt.norm() == 0.0 ? 0.0 : value_of(psi, phi_opt.normalized());
            if (std::abs(updated - value) <= 1e-15 * std::max(1.0, std::abs(updated))) {
                value = updated;
                converged = true;
                break;
            }
            value = updated;
        }
        best = std::max(best, value);
        if (!converged)
            throw VariationalNonConvergence(
                "coeff_A2_variational: no fixed point after " + std::to_string(iters) + " iterations", -detail::second_order_prefactor(s) * best);
    }
    return -detail::second_order_prefactor(s) * best;
}

struct PositiveRegimeCoefficients {
    double A1_prime = 0.0;
    double A2_prime = 0.0;
    int V01_dim = 0;
};

inline PositiveRegimeCoefficients coeffs_positive_regime(const GroundSpaceData& g, const PerturbationMatrix& pm,
                                                         const SingleCellPotential& v, const DisorderSupport& s,
                                                         const Tolerances& tol = {}) {
    if (s.regime != Regime::Positive) throw std::invalid_argument("coeffs_positive_regime: requires the positive regime");
    PositiveRegimeCoefficients out;
    const double p1 = pm.P(0);
    out.A1_prime = std::min(s.s_plus * p1, s.s_minus * p1);
    out.V01_dim = static_cast<int>(detail::subspace_basis(pm, Subspace::V01, v01_tolerance(v, tol)).cols());
    out.A2_prime = coeff_A2(g, pm, v, s, Subspace::V01, tol);
    return out;
}

/// True iff some psi in the ground space has V psi != 0.
inline bool nondegeneracy_check(const GroundSpaceData& g, const SingleCellPotential& v, const Tolerances& tol = {}) {
    return (v.matrix() * g.basis).norm() > tol.tol_case_rel * (1.0 + v.norm());
}

struct EdgeCoefficients {
    Theta theta;
    Regime regime = Regime::SignChanging;
    int p = 0;
    RVector P;
    /// Sign-changing coefficients; empty in the positive regime.
    std::optional<double> A1, A2;
    /// Positive-regime coefficients; empty in the sign-changing regime.
    std::optional<double> A1_prime, A2_prime;
    std::optional<int> V01_dim;
    EdgeCase edge_case = EdgeCase::NoMotion;
    bool nondegenerate = false;
    double tol_case = 0.0;

    double first_order() const { return regime == Regime::SignChanging ? *A1 : *A1_prime; }
    double second_order() const { return regime == Regime::SignChanging ? *A2 : *A2_prime; }
};

/// Runs the full coefficient computation at one minimizer and classifies the
/// case. Positive regime keys the linear case on P_1, so P_1 > 0 with s- = 0
/// is Linear with a zero bound.
inline EdgeCoefficients edge_coefficients(const GroundSpaceData& g, const SingleCellPotential& v,
                                          const DisorderSupport& s, const Tolerances& tol = {}) {
    EdgeCoefficients e;
    e.theta = g.theta;
    e.regime = s.regime;
    e.p = g.p;
    const auto pm = perturbation_matrix(g, v);
    e.P = pm.P;
    e.tol_case = case_tolerance(v, s, tol);
    e.nondegenerate = nondegeneracy_check(g, v, tol);
    double first_criterion = 0.0;
    if (s.regime == Regime::SignChanging) {
        e.A1 = coeff_A1(pm, s);
        e.A2 = coeff_A2(g, pm, v, s, Subspace::FullV0, tol);
        first_criterion = *e.A1;
    } else {
        const auto pos = coeffs_positive_regime(g, pm, v, s, tol);
        e.A1_prime = pos.A1_prime;
        e.A2_prime = pos.A2_prime;
        e.V01_dim = pos.V01_dim;
        first_criterion = pm.P(0);
    }
    if (std::abs(first_criterion) > e.tol_case)
        e.edge_case = EdgeCase::Linear;
    else if (std::abs(e.second_order()) > e.tol_case)
        e.edge_case = EdgeCase::Quadratic;
    else
        e.edge_case = EdgeCase::NoMotion;
    return e;
}

struct EdgeBound {
    double epsilon = 0.0;
    double value = 0.0;
    EdgeCase edge_case = EdgeCase::NoMotion;
    /// Quadratic bounds hold up to an O(eps^3) remainder that is not included.
    bool cubic_remainder = false;
    /// epsilon above the small-coupling warning threshold.
    bool large_epsilon = false;
};

inline EdgeBound edge_bound(const EdgeCoefficients& e, double epsilon, double warn_threshold = 0.1) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("edge_bound: epsilon must be positive");
    EdgeBound b;
    b.epsilon = epsilon;
    b.edge_case = e.edge_case;
    b.large_epsilon = epsilon > warn_threshold;
    switch (e.edge_case) {
        case EdgeCase::Linear: b.value = epsilon * e.first_order(); break;
        case EdgeCase::Quadratic:
            b.value = epsilon * epsilon * e.second_order();
            b.cubic_remainder = true;
            break;
        case EdgeCase::NoMotion: b.value = 0.0; break;
    }
    return b;
}

struct PFReport {
    bool applicable = false;
    bool simple = false;
    bool strictly_positive = false;
    double min_entry = 0.0;
    std::optional<double> gap;
    std::string reason;

    bool passed() const { return applicable && simple && strictly_positive; }
};

/// True iff H0 = -Delta + W (+ constant) with W real and diagonal.
inline bool is_alloy_form(const HoppingOperator& h) {
    const auto lap = laplacian(h.geometry());
    auto off_site_differs = [](const HopKey& key, cplx diff) {
        const bool onsite = key.k == key.k_prime && std::all_of(key.m.begin(), key.m.end(), [](int x) { return x == 0; });
        if (onsite) return diff.imag() != 0.0;
        return std::abs(diff) > 1e-14;
    };
    for (const auto& [key, value] : h.coefficients())
        if (off_site_differs(key, value - lap.coefficient(key.k, key.k_prime, key.m))) return false;
    for (const auto& [key, value] : lap.coefficients())
        if (off_site_differs(key, h.coefficient(key.k, key.k_prime, key.m) - value)) return false;
    return true;
}

/// Ground state of the theta = 0 fiber of an alloy-type operator: simple and
/// strictly positive after phase fixing.
inline PFReport perron_frobenius_check(const HoppingOperator& h, double tol_pos = 1e-10, const Tolerances& tol = {}) {
    PFReport r;
    if (!is_alloy_form(h)) {
        r.reason = "inapplicable: operator is not of the form -Delta + W";
        return r;
    }
    r.applicable = true;
    const auto spec = fiber_eigh(build_floquet(h, Theta(h.geometry().dimension(), 0.0)));
    const double norm = spec.eigenvalues.cwiseAbs().maxCoeff();
    const double e0 = spec.eigenvalues(0);
    int p = 0;
    while (p < spec.eigenvalues.size() && spec.eigenvalues(p) - e0 <= tol.deg(norm)) ++p;
    r.simple = p == 1;
    if (p < spec.eigenvalues.size()) r.gap = spec.eigenvalues(p) - e0;
    const CVector psi = spec.eigenvectors.col(0);
    r.min_entry = psi.real().minCoeff();
    const double max_imag = psi.imag().cwiseAbs().maxCoeff();
    r.strictly_positive = r.min_entry > tol_pos && max_imag <= 1e-12;
    r.reason = r.passed() ? "simple, strictly positive ground state" : (r.simple ? "ground state not strictly positive" : "ground state degenerate");
    return r;
}

}  // namespace edgeshift
