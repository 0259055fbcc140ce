#pragma once

// Finite-volume realizations of the random operator on a torus of L^d cells
// and the fiber-decomposition oracle for periodic configurations.

#include "edgeshift/verification/fiber_checks.hpp"
#include "edgeshift/verification/lanczos.hpp"

#include <random>

namespace edgeshift {

enum class SamplerKind { EndpointBernoulli, Uniform, PeriodicConstant };

struct Sampler {
    SamplerKind kind = SamplerKind::EndpointBernoulli;
    /// Coupling used by PeriodicConstant.
    double q = 0.0;

    static Sampler endpoint() { return {SamplerKind::EndpointBernoulli, 0.0}; }
    static Sampler uniform() { return {SamplerKind::Uniform, 0.0}; }
    static Sampler constant(double q) { return {SamplerKind::PeriodicConstant, q}; }
};

inline std::string to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::EndpointBernoulli: return "endpoint";
        case SamplerKind::Uniform: return "uniform";
        case SamplerKind::PeriodicConstant: return "constant";
    }
    return "unknown";
}

inline SamplerKind sampler_from_string(const std::string& s) {
    if (s == "endpoint" || s == "EndpointBernoulli") return SamplerKind::EndpointBernoulli;
    if (s == "uniform" || s == "Uniform") return SamplerKind::Uniform;
    if (s == "constant" || s == "PeriodicConstant") return SamplerKind::PeriodicConstant;
    throw std::invalid_argument("unknown sampler '" + s + "'");
}

/// i.i.d. couplings for `cells` cells. The same seed gives the same sequence
/// on every platform: bits come from mt19937_64 directly.
inline std::vector<double> draw_couplings(const DisorderSupport& s, const Sampler& sampler, std::size_t cells,
                                          std::uint64_t seed) {
    std::vector<double> omega(cells);
    std::mt19937_64 rng(seed);
    for (auto& w : omega) {
        switch (sampler.kind) {
            case SamplerKind::EndpointBernoulli: w = (rng() >> 63) ? s.s_plus : s.s_minus; break;
            case SamplerKind::Uniform: {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                w = s.s_minus + (s.s_plus - s.s_minus) * u;
                break;
            }
            case SamplerKind::PeriodicConstant: w = sampler.q; break;
        }
    }
    return omega;
}

struct BoxOptions {
    std::size_t max_dense_sites = 4096;
    LanczosOptions lanczos;
};

struct BoxSpectrumSample {
    int L = 0;
    std::vector<double> omega;
    double epsilon = 0.0;
    double lambda_min = 0.0;
    double residual = 0.0;
    bool dense = true;
    std::string boundary = "periodic";
};

class TorusLattice {
public:
    TorusLattice(const LatticeGeometry& g, int L) : g_(g), L_(L) {
        if (L < 1) throw std::invalid_argument("TorusLattice: L must be >= 1");
        cells_ = 1;
        for (int i = 0; i < g.dimension(); ++i) cells_ *= static_cast<std::size_t>(L);
    }

    std::size_t cells() const { return cells_; }
    std::size_t sites() const { return cells_ * static_cast<std::size_t>(g_.cell_size()); }

    std::vector<int> cell_coords(std::size_t c) const {
        std::vector<int> x(g_.dimension());
        for (int i = g_.dimension() - 1; i >= 0; --i) {
            x[i] = static_cast<int>(c % L_);
            c /= L_;
        }
        return x;
    }

    std::size_t cell_index(const std::vector<int>& x) const {
        std::size_t c = 0;
        for (int i = 0; i < g_.dimension(); ++i) c = c * L_ + static_cast<std::size_t>(((x[i] % L_) + L_) % L_);
        return c;
    }

    std::size_t site(std::size_t cell, int k) const { return cell * g_.cell_size() + k; }

private:
    LatticeGeometry g_;
    int L_;
    std::size_t cells_;
};

/// Triplets of H0 + eps sum_c omega_c V(. - c) on the torus. Hoppings that wrap
/// onto the same pair of sites are summed.
inline std::vector<Eigen::Triplet<cplx>> torus_triplets(const HoppingOperator& h, const SingleCellPotential& v,
                                                        const std::vector<double>& omega, double epsilon, int L) {
    const auto& g = h.geometry();
    const TorusLattice torus(g, L);
    if (omega.size() != torus.cells()) throw std::invalid_argument("torus_triplets: omega needs one value per cell");
    const int cs = g.cell_size();
    std::vector<Eigen::Triplet<cplx>> trip;
    std::vector<int> target(g.dimension());
    for (std::size_t c = 0; c < torus.cells(); ++c) {
        const auto x = torus.cell_coords(c);
        for (int k = 0; k < cs; ++k) {
            for (const auto& hop : h.row(k)) {
                for (int i = 0; i < g.dimension(); ++i) target[i] = x[i] + hop.cell_offset[i];
                trip.emplace_back(static_cast<int>(torus.site(c, k)),
                                  static_cast<int>(torus.site(torus.cell_index(target), hop.k_prime)), hop.value);
            }
            if (epsilon * omega[c] != 0.0)
                for (int kp = 0; kp < cs; ++kp)
                    if (v.matrix()(k, kp) != cplx(0.0))
                        trip.emplace_back(static_cast<int>(torus.site(c, k)), static_cast<int>(torus.site(c, kp)),
                                          epsilon * omega[c] * v.matrix()(k, kp));
        }
    }
    return trip;
}

/// Certified smallest eigenvalue of the torus realization for a given omega.
inline BoxSpectrumSample box_min_eig_for(const HoppingOperator& h, const SingleCellPotential& v,
                                         std::vector<double> omega, double epsilon, int L, const BoxOptions& opt = {}) {
    const TorusLattice torus(h.geometry(), L);
    const auto n = static_cast<Eigen::Index>(torus.sites());
    const auto trip = torus_triplets(h, v, omega, epsilon, L);
    BoxSpectrumSample out;
    out.L = L;
    out.omega = std::move(omega);
    out.epsilon = epsilon;

    if (torus.sites() <= opt.max_dense_sites) {
        CMatrix a = CMatrix::Zero(n, n);
        for (const auto& t : trip) a(t.row(), t.col()) += t.value();
        const bool real = a.imag().cwiseAbs().maxCoeff() == 0.0;
        double lam = 0.0, res = 0.0, scale = 0.0;
        auto solve = [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            Eigen::SelfAdjointEigenSolver<M> es(m);
            if (es.info() != Eigen::Success) throw ConvergenceError("box_min_eig: dense eigensolver failed");
            lam = es.eigenvalues()(0);
            scale = std::max(std::abs(lam), std::abs(es.eigenvalues()(n - 1)));
            res = (m * es.eigenvectors().col(0) - lam * es.eigenvectors().col(0)).norm();
        };
        if (real)
            solve(Eigen::MatrixXd(a.real()));
        else
            solve(a);
        if (res > opt.lanczos.rel_tol * std::max(scale, std::numeric_limits<double>::min()))
            throw ConvergenceError("box_min_eig: dense residual " + format_double(res) + " exceeds 1e-10 * |A|");
        out.lambda_min = lam;
        out.residual = res;
        out.dense = true;
        return out;
    }

    SparseC a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    const auto eig = smallest_eigenpair(a, 1, opt.lanczos);
    out.lambda_min = eig.value;
    out.residual = eig.residual;
    out.dense = false;
    return out;
}

/// Draws omega with `sampler` and returns the certified torus lambda_min.
inline BoxSpectrumSample box_min_eig(const HoppingOperator& h, const SingleCellPotential& v, const DisorderSupport& s,
                                     double epsilon, int L, const Sampler& sampler, std::uint64_t seed,
                                     const BoxOptions& opt = {}) {
    const TorusLattice torus(h.geometry(), L);
    return box_min_eig_for(h, v, draw_couplings(s, sampler, torus.cells(), seed), epsilon, L, opt);
}

/// Minimum of lambda_min(H0(theta) + eps q V) over the dual grid
/// theta_j = 2 pi j / (N L), j in [0, L)^d. Equals the torus lambda_min for the
/// constant configuration omega = q.
inline double torus_fiber_min(const HoppingOperator& h, const SingleCellPotential& v, double q, double epsilon, int L) {
    const auto& g = h.geometry();
    const TorusLattice torus(g, L);
    const double step = kTwoPi / (static_cast<double>(g.period()) * L);
    const auto values = parallel_map(torus.cells(), [&](std::size_t c) {
        const auto j = torus.cell_coords(c);
        Theta theta(g.dimension());
        for (int i = 0; i < g.dimension(); ++i) theta[i] = step * j[i];
        return fiber_lambda_min(h, v, theta, q, epsilon);
    });
    return *std::min_element(values.begin(), values.end());
}

struct MonteCarloResult {
    double epsilon = 0.0;
    int L = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambda_mins;
    double minimum = 0.0;
    double mean = 0.0;
    /// min over q in {s-, s+} of the constant-configuration torus minimum.
    double periodic_bound = 0.0;
};

/// `samples` realizations with seeds base_seed, base_seed + 1, ...; results
/// are ordered by seed whatever the worker count.
inline MonteCarloResult monte_carlo_min(const HoppingOperator& h, const SingleCellPotential& v,
                                        const DisorderSupport& s, double epsilon, int L, int samples,
                                        const Sampler& sampler, std::uint64_t base_seed, const BoxOptions& opt = {}) {
    if (samples < 1) throw std::invalid_argument("monte_carlo_min: samples must be >= 1");
    MonteCarloResult r;
    r.epsilon = epsilon;
    r.L = L;
    for (int i = 0; i < samples; ++i) r.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
    const auto boxes = parallel_map(r.seeds.size(), [&](std::size_t i) {
        return box_min_eig(h, v, s, epsilon, L, sampler, r.seeds[i], opt).lambda_min;
    });
    r.lambda_mins = boxes;
    r.minimum = *std::min_element(boxes.begin(), boxes.end());
    double sum = 0.0;
    for (double x : boxes) sum += x;
    r.mean = sum / boxes.size();
    r.periodic_bound = std::min(torus_fiber_min(h, v, s.s_minus, epsilon, L), torus_fiber_min(h, v, s.s_plus, epsilon, L));
    return r;
}

}  // namespace edgeshift
