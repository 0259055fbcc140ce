#pragma once

// Standing-hypothesis validation, the global energy shift and preset models.

#include "edgeshift/floquet.hpp"

namespace edgeshift {

/// A complete model: hopping operator, single-cell potential, disorder support.
struct Model {
    std::string name;
    HoppingOperator h;
    SingleCellPotential v;
    DisorderSupport support;
};

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::string witness;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }

    const HypothesisCheck& find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw std::out_of_range("ValidationReport: no check named " + name);
    }
};

namespace detail {

inline std::string coords_string(const std::vector<int>& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
    return s + ")";
}

}  // namespace detail

/// Checks hermiticity, finite range, non-triviality and the bottom of the
/// spectrum for H0, hermiticity and non-triviality for V, and the sign regime
/// of the support. Never throws for well-formed inputs.
inline ValidationReport validate_hypotheses(const HoppingOperator& h, const SingleCellPotential& v,
                                            const DisorderSupport& s, const Tolerances& tol = {},
                                            const ScanOptions& scan = {}) {
    ValidationReport r;
    const auto& g = h.geometry();

    {
        HypothesisCheck c{"hypa.hermitian", true, "all stored pairs symmetric"};
        const double thresh = 1e-14 * std::max(1.0, h.max_abs());
        for (const auto& [key, value] : h.coefficients()) {
            std::vector<int> minus_m(key.m.size());
            for (std::size_t i = 0; i < key.m.size(); ++i) minus_m[i] = -key.m[i];
            const cplx mirror = std::conj(h.coefficient(key.k_prime, key.k, minus_m));
            if (std::abs(value - mirror) > thresh) {
                c.passed = false;
                c.witness = "H0(" + std::to_string(key.k) + "," + std::to_string(key.k_prime) + ",m=" +
                            detail::coords_string(key.m) + ") = " + format_double(value.real()) + "+" +
                            format_double(value.imag()) + "i has no conjugate mirror";
                break;
            }
        }
        r.checks.push_back(std::move(c));
    }
    {
        int range = 0;
        for (const auto& [key, value] : h.coefficients())
            for (int mi : key.m) range = std::max(range, std::abs(mi));
        r.checks.push_back({"hypa.finite_range", range <= g.period(),
                            "max |m|_inf = " + std::to_string(range) + " <= N = " + std::to_string(g.period())});
    }
    {
        HypothesisCheck c{"hypa.nontrivial", false, "no k0 != 0 with H0(0,k0) != 0"};
        for (const auto& [key, value] : h.coefficients()) {
            if (key.k != 0 || value == cplx(0.0)) continue;
            auto k0 = g.site_coords(key.k_prime);
            for (std::size_t i = 0; i < k0.size(); ++i) k0[i] += key.m[i];
            if (std::any_of(k0.begin(), k0.end(), [](int x) { return x != 0; })) {
                c.passed = true;
                c.witness = "k0 = " + detail::coords_string(k0);
                break;
            }
        }
        r.checks.push_back(std::move(c));
    }
    {
        HypothesisCheck c{"hypa.bottom_at_zero", false, ""};
        if (!r.checks.front().passed) {
            c.witness = "skipped: H0 is not Hermitian";
        } else {
            try {
                const auto set = scan_theta_set(h, scan, tol);
                const double scale = std::max(1.0, hermitian_norm(build_floquet(h, Theta(g.dimension(), 0.0)).matrix));
                c.passed = std::abs(set.E0) <= tol.tol_shift * scale;
                c.witness = "inf over the zone of lambda_min = " + format_double(set.E0);
            } catch (const Error& e) {
                c.witness = std::string("zone scan failed: ") + e.what();
            }
        }
        r.checks.push_back(std::move(c));
    }
    {
        const bool ok = v.size() == g.cell_size();
        r.checks.push_back({"hypb.dimension", ok,
                            "V is " + std::to_string(v.size()) + "x" + std::to_string(v.size()) + ", cell has " +
                                std::to_string(g.cell_size()) + " sites"});
    }
    {
        HypothesisCheck c{"hypb.hermitian", true, "V equals its conjugate transpose"};
        const auto& m = v.matrix();
        for (Eigen::Index i = 0; i < m.rows() && c.passed; ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (m(i, j) != std::conj(m(j, i))) {
                    c.passed = false;
                    c.witness = "V(" + std::to_string(i) + "," + std::to_string(j) + ") != conj(V(" + std::to_string(j) +
                                "," + std::to_string(i) + "))";
                    break;
                }
        r.checks.push_back(std::move(c));
    }
    {
        const double mx = v.matrix().size() ? v.matrix().cwiseAbs().maxCoeff() : 0.0;
        r.checks.push_back({"hypb.nontrivial", mx > 0.0, "max |V_ij| = " + format_double(mx)});
    }
    {
        const bool ok = s.consistent();
        const std::string name = s.regime == Regime::SignChanging ? "hypc" : "hypc_prime";
        r.checks.push_back({name, ok,
                            "s_minus = " + format_double(s.s_minus) + ", s_plus = " + format_double(s.s_plus) +
                                ", regime = " + to_string(s.regime)});
    }
    return r;
}

inline ValidationReport validate_hypotheses(const Model& m, const Tolerances& tol = {}, const ScanOptions& scan = {}) {
    return validate_hypotheses(m.h, m.v, m.support, tol, scan);
}

/// Subtracts the zone minimum of lambda_min from the on-site terms so that
/// inf sigma(H0) = 0. The applied amount accumulates in energy_shift().
inline HoppingOperator shift_to_zero(const HoppingOperator& h, int bz_resolution = 64, const Tolerances& tol = {},
                                     int refinements = 6) {
    ScanOptions opt;
    opt.grid_per_dim = bz_resolution;
    opt.refinements = refinements;
    const auto set = scan_theta_set(h, opt, tol);
    auto shifted = h.shifted_by(set.E0);

    const auto check = scan_theta_set(shifted, opt, tol);
    const double scale =
        std::max(1.0, hermitian_norm(build_floquet(shifted, Theta(h.geometry().dimension(), 0.0)).matrix));
    if (std::abs(check.E0) > tol.tol_shift * scale)
        throw ConvergenceError("shift_to_zero: shifted minimum " + format_double(check.E0) + " exceeds tol_shift");
    return shifted;
}

inline Model shift_to_zero(Model m, int bz_resolution = 64, const Tolerances& tol = {}) {
    m.h = shift_to_zero(m.h, bz_resolution, tol);
    return m;
}

enum class Preset { Anderson, Dipole, Quartic, AlloyPeriodicW };

inline Preset preset_from_string(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "anderson") return Preset::Anderson;
    if (s == "dipole") return Preset::Dipole;
    if (s == "quartic") return Preset::Quartic;
    if (s == "alloy" || s == "alloyperiodicw" || s == "alloy_periodic_w") return Preset::AlloyPeriodicW;
    throw std::invalid_argument("unknown preset model '" + s + "'");
}

inline std::string to_string(Preset p) {
    switch (p) {
        case Preset::Anderson: return "anderson";
        case Preset::Dipole: return "dipole";
        case Preset::Quartic: return "quartic";
        case Preset::AlloyPeriodicW: return "alloy";
    }
    return "unknown";
}

struct PresetParams {
    int dimension = 1;
    /// Defaults: Anderson 1, Dipole 2, Quartic 3, AlloyPeriodicW required.
    std::optional<int> period;
    /// Periodic on-site potential W on the cell (AlloyPeriodicW only).
    std::vector<double> W;
    std::optional<DisorderSupport> support;
};

/// The (-Delta_Z)^2 operator on Z: stencil (1, -4, 6, -4, 1).
inline HoppingOperator bilaplacian_1d(int period) {
    return HoppingOperator::from_kernel(LatticeGeometry(1, period), [](const std::vector<int>& x, const std::vector<int>& y) {
        switch (std::abs(x[0] - y[0])) {
            case 0: return cplx(6.0);
            case 1: return cplx(-4.0);
            case 2: return cplx(1.0);
            default: return cplx(0.0);
        }
    });
}

/// Returns one of the built-in models.
///
/// - Anderson: N = 1, H0 = -Delta, V = [1].
/// - Dipole: N = 2 by default, H0 = -Delta, V = delta_0 - delta_{e1}.
/// - Quartic: d = 1, N = 3, H0 = (-Delta)^2, V = -1/2 delta_{-1} + delta_0 - 1/2 delta_1.
///   The symmetric cell {-1, 0, 1} is translated by +1 onto the canonical cell
///   {0, 1, 2}, so V = diag(-1/2, 1, -1/2) in canonical order.
/// - AlloyPeriodicW: H0 = -Delta + W shifted so that inf sigma(H0) = 0, V = delta_0.
///
/// The support defaults to s = +-1 in the sign-changing regime.
inline Model preset_model(Preset which, const PresetParams& params = {}) {
    const int d = params.dimension;
    if (d < 1) throw std::invalid_argument("preset_model: dimension must be >= 1");
    Model m{to_string(which), laplacian(LatticeGeometry(d, 1)), SingleCellPotential::diagonal({1.0}),
            params.support.value_or(DisorderSupport{})};

    switch (which) {
        case Preset::Anderson: {
            if (params.period.value_or(1) != 1) throw std::invalid_argument("preset_model: Anderson requires N = 1");
            if (!params.W.empty()) throw std::invalid_argument("preset_model: Anderson takes no W");
            break;
        }
        case Preset::Dipole: {
            const int n = params.period.value_or(2);
            if (n < 2) throw std::invalid_argument("preset_model: Dipole requires N >= 2");
            if (!params.W.empty()) throw std::invalid_argument("preset_model: Dipole takes no W");
            LatticeGeometry g(d, n);
            std::vector<double> v(g.cell_size(), 0.0);
            std::vector<int> e1(d, 0);
            e1[0] = 1;
            v[0] = 1.0;
            v[g.site_index(e1)] = -1.0;
            m.h = laplacian(g);
            m.v = SingleCellPotential::diagonal(v);
            break;
        }
        case Preset::Quartic: {
            if (d != 1 || params.period.value_or(3) != 3)
                throw std::invalid_argument("preset_model: Quartic is defined for d = 1, N = 3 only");
            if (!params.W.empty()) throw std::invalid_argument("preset_model: Quartic takes no W");
            m.h = bilaplacian_1d(3);
            m.v = SingleCellPotential::diagonal({-0.5, 1.0, -0.5});
            break;
        }
        case Preset::AlloyPeriodicW: {
            if (!params.period) throw std::invalid_argument("preset_model: AlloyPeriodicW requires a period");
            LatticeGeometry g(d, *params.period);
            std::vector<double> w = params.W.empty() ? std::vector<double>(g.cell_size(), 0.0) : params.W;
            if (static_cast<int>(w.size()) != g.cell_size())
                throw std::invalid_argument("preset_model: W must have N^d entries");
            std::vector<double> v(g.cell_size(), 0.0);
            v[0] = 1.0;
            m.h = shift_to_zero(laplacian(g, w));
            m.v = SingleCellPotential::diagonal(v);
            break;
        }
    }
    return m;
}

}  // namespace edgeshift
