#pragma once

// Floquet fibers H0(theta), their spectra, the Brillouin-zone scan for the
// minimizing set and the degenerate ground eigenspace at a minimizer.

#include "edgeshift/lattice.hpp"
#include "edgeshift/parallel.hpp"

#include <limits>

namespace edgeshift {

struct FloquetMatrix {
    Theta theta;
    CMatrix matrix;
};

/// matrix(k, k') = sum_m e^{i theta.m} H0(k, k' - m), i.e. every stored
/// amplitude H0(k, k' + m) contributes with phase e^{-i theta.m}.
inline FloquetMatrix build_floquet(const HoppingOperator& h, const Theta& theta) {
    const auto& g = h.geometry();
    if (static_cast<int>(theta.size()) != g.dimension())
        throw std::invalid_argument("build_floquet: theta has wrong dimension");
    CMatrix m = CMatrix::Zero(g.cell_size(), g.cell_size());
    for (const auto& [key, value] : h.coefficients()) {
        double phase = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) phase -= theta[i] * key.m[i];
        m(key.k, key.k_prime) += value * std::polar(1.0, phase);
    }
    return FloquetMatrix{theta, std::move(m)};
}

/// Full fiber spectrum, ascending, with phase-fixed orthonormal eigenvectors.
struct FiberSpectrum {
    RVector eigenvalues;
    CMatrix eigenvectors;
};

inline FiberSpectrum fiber_eigh(const CMatrix& f) {
    if (f.rows() != f.cols()) throw std::invalid_argument("fiber_eigh: matrix must be square");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(f);
    if (es.info() != Eigen::Success) throw ConvergenceError("fiber_eigh: Hermitian eigensolver did not converge");
    FiberSpectrum out{es.eigenvalues(), es.eigenvectors()};
    for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) fix_phase(out.eigenvectors.col(j));

    const double scale = std::max(out.eigenvalues.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const CMatrix residual = f * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
    if (residual.colwise().norm().maxCoeff() > 1e-12 * scale)
        throw ConvergenceError("fiber_eigh: eigenpair residual exceeds 1e-12 * ||F||");
    return out;
}

inline FiberSpectrum fiber_eigh(const FloquetMatrix& f) { return fiber_eigh(f.matrix); }

/// Smallest eigenvalue of H0(theta).
inline double lambda_min(const HoppingOperator& h, const Theta& theta) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(build_floquet(h, theta).matrix, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("lambda_min: eigensolver did not converge");
    return es.eigenvalues()(0);
}

/// Ground eigenspace of the fiber at a minimizing theta.
struct GroundSpaceData {
    Theta theta;
    CMatrix fiber;
    RVector eigenvalues;
    CMatrix eigenvectors;
    int p = 0;
    CMatrix basis;
    /// Second distinct level minus the ground level; empty when p == cell_size.
    std::optional<double> gap;
    double tol_deg = 0.0;

    double ground_energy() const { return eigenvalues(0); }
    int cell_size() const { return static_cast<int>(eigenvalues.size()); }
};

inline GroundSpaceData ground_space(const HoppingOperator& h, const Theta& theta, const Tolerances& tol = {}) {
    auto f = build_floquet(h, theta);
    auto spec = fiber_eigh(f);
    const double norm = std::max(std::abs(spec.eigenvalues(0)), std::abs(spec.eigenvalues(spec.eigenvalues.size() - 1)));
    if (spec.eigenvalues(0) > tol.tol_theta * std::max(1.0, norm))
        throw Error("ground_space: theta is not a minimizer (lambda_min = " + format_double(spec.eigenvalues(0)) +
                    " > tol_theta)");

    GroundSpaceData g;
    g.theta = theta;
    g.tol_deg = tol.deg(norm);
    const double e0 = spec.eigenvalues(0);
    int p = 0;
    while (p < spec.eigenvalues.size() && spec.eigenvalues(p) - e0 <= g.tol_deg) ++p;
    g.p = p;
    g.basis = spec.eigenvectors.leftCols(p);
    if (p < spec.eigenvalues.size()) g.gap = spec.eigenvalues(p) - e0;
    g.fiber = std::move(f.matrix);
    g.eigenvalues = std::move(spec.eigenvalues);
    g.eigenvectors = std::move(spec.eigenvectors);
    return g;
}

struct ScanOptions {
    int grid_per_dim = 64;
    int refinements = 6;
    /// Extra bisection levels allowed past `refinements` until the stencil
    /// neighbours rise by at most tol_theta.
    int max_extra_levels = 40;
    std::size_t max_candidates = 256;
};

struct ThetaSet {
    std::vector<Theta> minimizers;
    double E0 = 0.0;
    /// Final bisection spacing per dimension.
    double resolution = 0.0;
    /// Base grid nodes and their lowest fiber eigenvalue.
    std::vector<std::pair<Theta, double>> grid;
};

namespace detail {

inline Theta grid_node(std::size_t flat, int per_dim, int d, double h) {
    Theta t(d);
    for (int i = d - 1; i >= 0; --i) {
        t[i] = static_cast<double>(flat % per_dim) * h;
        flat /= per_dim;
    }
    return t;
}

inline std::vector<std::vector<int>> stencil_offsets(int d) {
    std::vector<std::vector<int>> out;
    int count = 1;
    for (int i = 0; i < d; ++i) count *= 3;
    for (int o = 0; o < count; ++o) {
        std::vector<int> off(d);
        int rest = o;
        bool centre = true;
        for (int i = d - 1; i >= 0; --i) {
            off[i] = rest % 3 - 1;
            rest /= 3;
            centre = centre && off[i] == 0;
        }
        if (!centre) out.push_back(std::move(off));
    }
    return out;
}

struct Refined {
    Theta theta;
    double value;
};

/// Compass search with spacing halving: move to the best stencil node while it
/// improves, otherwise halve. Stops once `refinements` halvings are done and
/// every stencil neighbour lies within `tol` of the centre, which bounds the
/// distance to a smooth minimum by tol / 4.
inline Refined refine_candidate(const HoppingOperator& h, Theta centre, double value, double spacing,
                                const ScanOptions& opt, double tol) {
    const double zone = h.geometry().zone_length();
    const auto offsets = stencil_offsets(h.geometry().dimension());
    for (int level = 1;; ++level) {
        spacing *= 0.5;
        double rise = 0.0;
        for (int moves = 0; moves < 64; ++moves) {
            Theta best = centre;
            double best_value = value;
            rise = 0.0;
            for (const auto& off : offsets) {
                Theta t = centre;
                for (std::size_t i = 0; i < t.size(); ++i) t[i] += off[i] * spacing;
                t = wrap_theta(std::move(t), zone);
                const double v = lambda_min(h, t);
                rise = std::max(rise, v - value);
                if (v < best_value) {
                    best_value = v;
                    best = std::move(t);
                }
            }
            if (best_value >= value) break;
            centre = std::move(best);
            value = best_value;
        }
        if (level >= opt.refinements && rise <= tol) return {centre, value};
        if (level >= opt.refinements + opt.max_extra_levels)
            throw ConvergenceError("scan_theta_set: minimum not resolved to " + format_double(tol) +
                                   " after the final refinement (neighbour rise " + format_double(rise) + ")");
    }
}

}  // namespace detail

/// Uniform grid over [0, 2 pi / N)^d followed by local bisection around every
/// grid-local minimum. Returns the deduplicated minimizers (lexicographic
/// order) and the global fiber minimum E0.
inline ThetaSet scan_theta_set(const HoppingOperator& h, const ScanOptions& opt = {}, const Tolerances& tol = {}) {
    if (opt.grid_per_dim < 2 || opt.refinements < 0) throw std::invalid_argument("scan_theta_set: bad grid options");
    const int d = h.geometry().dimension();
    const double zone = h.geometry().zone_length();
    const double spacing = zone / opt.grid_per_dim;
    std::size_t nodes = 1;
    for (int i = 0; i < d; ++i) nodes *= static_cast<std::size_t>(opt.grid_per_dim);

    const double scale = std::max(1.0, hermitian_norm(build_floquet(h, Theta(d, 0.0)).matrix));
    const double abs_tol = tol.tol_theta * scale;

    const auto values = parallel_map(nodes, [&](std::size_t i) { return lambda_min(h, detail::grid_node(i, opt.grid_per_dim, d, spacing)); });

    // Grid-local minima (periodic neighbourhood).
    const auto offsets = detail::stencil_offsets(d);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < nodes; ++i) {
        std::vector<int> idx(d);
        std::size_t rest = i;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rest % opt.grid_per_dim);
            rest /= opt.grid_per_dim;
        }
        bool local_min = true;
        for (const auto& off : offsets) {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) flat = flat * opt.grid_per_dim + (idx[a] + off[a] + opt.grid_per_dim) % opt.grid_per_dim;
            if (values[flat] < values[i]) {
                local_min = false;
                break;
            }
        }
        if (local_min) candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (candidates.size() > opt.max_candidates) candidates.resize(opt.max_candidates);

    const auto refined = parallel_map(candidates.size(), [&](std::size_t c) {
        const std::size_t node = candidates[c];
        return detail::refine_candidate(h, detail::grid_node(node, opt.grid_per_dim, d, spacing), values[node], spacing,
                                        opt, abs_tol);
    });

    ThetaSet out;
    out.resolution = spacing / std::pow(2.0, opt.refinements);
    out.E0 = std::numeric_limits<double>::infinity();
    for (const auto& r : refined) out.E0 = std::min(out.E0, r.value);

    std::vector<detail::Refined> kept;
    for (const auto& r : refined)
        if (r.value <= out.E0 + abs_tol) kept.push_back(r);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.value != b.value ? a.value < b.value : a.theta < b.theta;
    });
    std::vector<Theta> unique;
    for (const auto& r : kept) {
        bool dup = false;
        for (const auto& u : unique) dup = dup || theta_distance(u, r.theta, zone) <= spacing;
        if (!dup) unique.push_back(r.theta);
    }
    std::sort(unique.begin(), unique.end());
    out.minimizers = std::move(unique);

    out.grid.reserve(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out.grid.emplace_back(detail::grid_node(i, opt.grid_per_dim, d, spacing), values[i]);
    return out;
}

}  // namespace edgeshift
