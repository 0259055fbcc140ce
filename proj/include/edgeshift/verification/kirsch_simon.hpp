#pragma once

// Two-sided dispersion bound for the lowest band of an alloy operator -Delta + W:
//   (a-/a+)^2 F(theta) <= E0(theta) - E0(0) <= F(theta)
// where a-, a+ are the extreme entries of the positive theta = 0 ground state
// and F is the dispersion factor.

#include "edgeshift/perturbation.hpp"

namespace edgeshift {

enum class DispersionFactor {
    /// 2 sum_i (1 - cos theta_i): the free-Laplacian band.
    TwoOneMinusCos,
    /// sum_i (1 - cos theta_i)
    OneMinusCos,
    /// 2d - sum_i cos theta_i, which does not vanish at theta = 0.
    AsPrinted,
};

inline std::string to_string(DispersionFactor f) {
    switch (f) {
        case DispersionFactor::TwoOneMinusCos: return "two_one_minus_cos";
        case DispersionFactor::OneMinusCos: return "one_minus_cos";
        case DispersionFactor::AsPrinted: return "as_printed";
    }
    return "unknown";
}

inline DispersionFactor dispersion_from_string(const std::string& s) {
    if (s == "two_one_minus_cos") return DispersionFactor::TwoOneMinusCos;
    if (s == "one_minus_cos") return DispersionFactor::OneMinusCos;
    if (s == "as_printed") return DispersionFactor::AsPrinted;
    throw std::invalid_argument("unknown dispersion factor '" + s + "'");
}

inline double dispersion(DispersionFactor f, const Theta& theta) {
    double s = 0.0;
    for (double t : theta) s += 1.0 - std::cos(t);
    switch (f) {
        case DispersionFactor::TwoOneMinusCos: return 2.0 * s;
        case DispersionFactor::OneMinusCos: return s;
        case DispersionFactor::AsPrinted: return static_cast<double>(theta.size()) + s;
    }
    return s;
}

/// per_dim^d points of the centred zone [-pi/N, pi/N)^d, lexicographic.
inline std::vector<Theta> centered_zone_grid(int d, int period, int per_dim) {
    if (d < 1 || period < 1 || per_dim < 1) throw std::invalid_argument("centered_zone_grid: bad sizes");
    const double zone = kTwoPi / period;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_dim);
    std::vector<Theta> out;
    out.reserve(total);
    for (std::size_t f = 0; f < total; ++f) {
        Theta t(d);
        std::size_t rest = f;
        for (int i = d - 1; i >= 0; --i) {
            t[i] = -0.5 * zone + zone * static_cast<double>(rest % per_dim) / per_dim;
            rest /= per_dim;
        }
        out.push_back(std::move(t));
    }
    return out;
}

struct KirschSimonPoint {
    Theta theta;
    double dE = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool ok = true;
};

struct KirschSimonReport {
    DispersionFactor factor = DispersionFactor::TwoOneMinusCos;
    double a_minus = 0.0, a_plus = 0.0;
    std::vector<KirschSimonPoint> points;
    int violations = 0;
    double tolerance = 0.0;

    bool passed() const { return violations == 0; }
};

inline KirschSimonReport kirsch_simon_sandwich(const HoppingOperator& h, const std::vector<Theta>& grid,
                                               DispersionFactor factor = DispersionFactor::TwoOneMinusCos,
                                               double tol = 1e-12) {
    const auto pf = perron_frobenius_check(h);
    if (!pf.applicable) throw std::invalid_argument("kirsch_simon_sandwich: operator is not of alloy form -Delta + W");
    if (!pf.passed()) throw Error("kirsch_simon_sandwich: theta = 0 ground state is not simple and positive");
    const int d = h.geometry().dimension();
    const auto spec0 = fiber_eigh(build_floquet(h, Theta(d, 0.0)));
    const CVector psi = spec0.eigenvectors.col(0);
    KirschSimonReport r;
    r.factor = factor;
    r.a_minus = psi.real().minCoeff();
    r.a_plus = psi.real().maxCoeff();
    const double ratio2 = (r.a_minus / r.a_plus) * (r.a_minus / r.a_plus);
    const double e0 = spec0.eigenvalues(0);
    r.tolerance = tol * std::max(1.0, spec0.eigenvalues.cwiseAbs().maxCoeff());

    const auto de = parallel_map(grid.size(), [&](std::size_t i) { return lambda_min(h, grid[i]) - e0; });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        KirschSimonPoint p;
        p.theta = grid[i];
        p.dE = de[i];
        const double f = dispersion(factor, grid[i]);
        p.lower = ratio2 * f;
        p.upper = f;
        p.ok = p.dE >= p.lower - r.tolerance && p.dE <= p.upper + r.tolerance;
        if (!p.ok) ++r.violations;
        r.points.push_back(std::move(p));
    }
    return r;
}

}  // namespace edgeshift
