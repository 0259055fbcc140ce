#pragma once

// Truncated quasi-periodic trial states on the full lattice and the quartic
// trial state built from two of them.
//
// A component (theta, u0) is extended by u(c, k) = e^{-i theta.(N c)} u0(k) for
// cell vector c and cell site k, then cut off outside the cells [-n, n]^d.
// Rayleigh quotients are accumulated cell by cell straight from the hopping
// table, so no lattice-sized vector is ever stored.

#include "edgeshift/perturbation.hpp"
#include "edgeshift/verification/fit.hpp"

namespace edgeshift {

struct QuasiComponent {
    Theta theta;
    CVector u0;
    cplx amplitude{1.0, 0.0};
};

struct RayleighParts {
    /// <u, H0 u>
    double kinetic = 0.0;
    /// <u, (sum_c V(. - c)) u>
    double potential = 0.0;
    double norm2 = 0.0;
    long long cells = 0;

    double quotient(double coupling) const { return (kinetic + coupling * potential) / norm2; }
};

namespace detail {

class CellOdometer {
public:
    CellOdometer(int d, long long n) : lo_(-n), hi_(n), c_(d, -n) {}
    const std::vector<long long>& cell() const { return c_; }
    bool next() {
        for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
            if (c_[i] < hi_) {
                ++c_[i];
                return true;
            }
            c_[i] = lo_;
        }
        return false;
    }

private:
    long long lo_, hi_;
    std::vector<long long> c_;
};

inline void quasi_values(const std::vector<QuasiComponent>& comps, const std::vector<long long>& cell, int period,
                         CVector& out) {
    out.setZero();
    for (const auto& comp : comps) {
        double phase = 0.0;
        for (std::size_t i = 0; i < cell.size(); ++i) phase -= comp.theta[i] * static_cast<double>(period * cell[i]);
        out += (comp.amplitude * std::polar(1.0, phase)) * comp.u0;
    }
}

}  // namespace detail

/// Kinetic, potential and norm parts of the truncated superposition on [-n, n]^d cells.
inline RayleighParts truncated_rayleigh_parts(const HoppingOperator& h, const SingleCellPotential& v,
                                              const std::vector<QuasiComponent>& comps, long long n) {
    const auto& g = h.geometry();
    const int d = g.dimension();
    const int cs = g.cell_size();
    if (n < 0) throw std::invalid_argument("truncated_rayleigh_parts: n must be >= 0");
    if (comps.empty()) throw std::invalid_argument("truncated_rayleigh_parts: no components");
    for (const auto& c : comps) {
        if (static_cast<int>(c.theta.size()) != d || c.u0.size() != cs)
            throw std::invalid_argument("truncated_rayleigh_parts: component does not match the geometry");
    }
    if (v.size() != cs) throw std::invalid_argument("truncated_rayleigh_parts: V does not match the cell");

    RayleighParts r;
    CVector here(cs), there(cs);
    std::vector<long long> target(d);
    detail::CellOdometer odo(d, n);
    do {
        const auto& c = odo.cell();
        detail::quasi_values(comps, c, g.period(), here);
        ++r.cells;
        r.norm2 += here.squaredNorm();
        r.potential += (here.adjoint() * v.matrix() * here)(0, 0).real();
        cplx kin = 0.0;
        for (int k = 0; k < cs; ++k) {
            if (here(k) == cplx(0.0)) continue;
            for (const auto& hop : h.row(k)) {
                bool inside = true;
                for (int i = 0; i < d; ++i) {
                    target[i] = c[i] + hop.cell_offset[i];
                    inside = inside && target[i] >= -n && target[i] <= n;
                }
                if (!inside) continue;
                cplx value;
                if (std::all_of(hop.cell_offset.begin(), hop.cell_offset.end(), [](int o) { return o == 0; })) {
                    value = here(hop.k_prime);
                } else {
                    detail::quasi_values(comps, target, g.period(), there);
                    value = there(hop.k_prime);
                }
                kin += std::conj(here(k)) * hop.value * value;
            }
        }
        r.kinetic += kin.real();
    } while (odo.next());
    if (r.norm2 == 0.0) throw std::invalid_argument("truncated_rayleigh_parts: trial state vanishes on the box");
    return r;
}

struct QuasiPeriodicReport {
    std::vector<long long> n_list;
    std::vector<double> quotients;
    /// <u0, (H0(theta) + eps q V) u0> / |u0|^2
    double fiber_value = 0.0;
    std::vector<double> residuals;
    /// log-log slope of |residual| against n; empty when all residuals vanish.
    std::optional<LineFit> residual_fit;
};

/// Rayleigh quotients of the truncated theta-quasi-periodic extension of u0
/// for H0 + eps q sum_c V(. - c), compared with the fiber quotient.
inline QuasiPeriodicReport quasiperiodic_rayleigh(const HoppingOperator& h, const SingleCellPotential& v, double q,
                                                  double epsilon, const Theta& theta, const CVector& u0,
                                                  const std::vector<long long>& n_list) {
    if (u0.size() == 0 || u0.norm() == 0.0) throw std::invalid_argument("quasiperiodic_rayleigh: u0 must be nonzero");
    const std::vector<QuasiComponent> comps{{theta, u0, 1.0}};
    const double coupling = epsilon * q;
    QuasiPeriodicReport rep;
    rep.n_list = n_list;
    const CMatrix fiber = build_floquet(h, theta).matrix + coupling * v.matrix();
    rep.fiber_value = (u0.adjoint() * fiber * u0)(0, 0).real() / u0.squaredNorm();

    const auto parts = parallel_map(n_list.size(), [&](std::size_t i) { return truncated_rayleigh_parts(h, v, comps, n_list[i]); });
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        rep.quotients.push_back(parts[i].quotient(coupling));
        rep.residuals.push_back(rep.quotients.back() - rep.fiber_value);
        if (rep.residuals.back() != 0.0) {
            xs.push_back(static_cast<double>(n_list[i]));
            ys.push_back(rep.residuals.back());
        }
    }
    if (xs.size() >= 2) rep.residual_fit = loglog_fit(xs, ys);
    return rep;
}

// ---- quartic example ------------------------------------------------------

/// Ground state of the quartic fiber at theta for |theta| < pi/3, in the
/// canonical cell order {0, 1, 2} (symmetric sites -1, 0, 1).
inline CVector quartic_ground_state(double theta) {
    CVector u(3);
    u << std::polar(1.0, theta), cplx(1.0), std::polar(1.0, -theta);
    return u / std::sqrt(3.0);
}

/// Per-cell coupling <psi0(0), V psi0(tau)> of the two quartic trial
/// components; equals (1/6)(2 - e^{i tau} - e^{-i tau}).
inline cplx quartic_cross_term(double tau) {
    const auto v = preset_model(Preset::Quartic).v;
    return (quartic_ground_state(0.0).adjoint() * v.matrix() * quartic_ground_state(tau))(0, 0);
}

/// Smallest admissible truncation for the quartic trial state. The truncated
/// plane waves carry a boundary energy of at most (4/3) / (2n + 1) per unit
/// norm; requiring it below eps^{1+2 xi} / 60 gives n >= 40 eps^{-(1+2 xi)}.
inline long long quartic_required_n(double epsilon, double xi) {
    if (!(epsilon > 0.0)) return 0;
    const double n = std::ceil(40.0 * std::pow(epsilon, -(1.0 + 2.0 * xi)));
    if (!(n < 4e9)) throw std::invalid_argument("quartic_trial_energy: epsilon too small, required n overflows");
    return static_cast<long long>(n);
}

struct QuarticTrialResult {
    double epsilon = 0.0;
    double xi = 0.0;
    long long n = 0;
    double value = 0.0;
    /// -(1/6) eps^{1+2 xi}
    double target = 0.0;
    bool meets_target = false;
};

/// Rayleigh quotient of u_n = f_n(0) + eps^xi f_n(eps^xi) for H0 + eps q V_per
/// on the quartic model. n = 0 picks quartic_required_n; a smaller explicit n
/// throws with the estimate.
inline QuarticTrialResult quartic_trial_energy(double epsilon, double xi, long long n = 0, double q = 1.0) {
    if (!(xi > 0.25)) throw std::invalid_argument("quartic_trial_energy: xi must exceed 1/4");
    if (epsilon < 0.0) throw std::invalid_argument("quartic_trial_energy: epsilon must be >= 0");
    const long long need = quartic_required_n(epsilon, xi);
    if (n == 0) n = need;
    if (n <= 0) throw std::invalid_argument("quartic_trial_energy: n must be positive when epsilon = 0");
    if (n < need)
        throw std::invalid_argument("quartic_trial_energy: n = " + std::to_string(n) +
                                    " is too small for epsilon = " + format_double(epsilon) +
                                    "; truncation needs n >= " + std::to_string(need));
    const auto m = preset_model(Preset::Quartic);
    const double tau = std::pow(epsilon, xi);
    std::vector<QuasiComponent> comps{{{0.0}, quartic_ground_state(0.0), 1.0}};
    if (epsilon > 0.0) comps.push_back({{tau}, quartic_ground_state(tau), tau});
    const auto parts = truncated_rayleigh_parts(m.h, m.v, comps, n);

    QuarticTrialResult r;
    r.epsilon = epsilon;
    r.xi = xi;
    r.n = n;
    r.value = parts.quotient(epsilon * q);
    r.target = -std::pow(epsilon, 1.0 + 2.0 * xi) / 6.0;
    r.meets_target = r.value <= r.target;
    return r;
}

}  // namespace edgeshift
