#pragma once

// Shared numeric types, tolerances and small helpers used by every module.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace edgeshift {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Quasi-momentum, one component per space dimension.
using Theta = std::vector<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base error for every failure the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative or dense solver did not reach its convergence target.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Tolerances controlling degeneracy clustering, the Brillouin-zone scan and
/// the linear/quadratic/no-motion decision. Defaults are the documented ones.
struct Tolerances {
    double tol_shift = 1e-9;
    double tol_theta = 1e-9;
    double tol_deg_abs = 1e-10;
    double tol_deg_rel = 1e-8;
    double tol_case_rel = 1e-10;

    /// Degeneracy cluster width for a fiber matrix of operator norm `norm`.
    double deg(double norm) const { return std::max(tol_deg_abs, tol_deg_rel * norm); }

    void check() const {
        if (!(tol_shift > 0 && tol_theta > 0 && tol_deg_abs > 0 && tol_deg_rel > 0 && tol_case_rel > 0))
            throw std::invalid_argument("all tolerances must be positive");
    }
};

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
inline double hermitian_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Rotates `v` so that its largest-modulus entry is real and positive. Ties
/// (within 1e-12 relative) resolve to the lowest index.
inline void fix_phase(Eigen::Ref<CVector> v) {
    if (v.size() == 0) return;
    const double vmax = v.cwiseAbs().maxCoeff();
    if (vmax == 0.0) return;
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= vmax * (1.0 - 1e-12)) {
            pivot = i;
            break;
        }
    }
    const cplx phase = std::conj(v(pivot)) / std::abs(v(pivot));
    v *= phase;
    v(pivot) = cplx(v(pivot).real(), 0.0);
}

/// Shortest decimal string that parses back to exactly `x`.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw Error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

/// Wraps each component of `theta` into [0, period).
inline Theta wrap_theta(Theta theta, double period) {
    for (auto& t : theta) {
        t = std::fmod(t, period);
        if (t < 0) t += period;
        if (t >= period) t = 0.0;
    }
    return theta;
}

/// Distance between two quasi-momenta on the torus [0, period)^d.
inline double theta_distance(const Theta& a, const Theta& b, double period) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::fmod(std::abs(a[i] - b[i]), period);
        worst = std::max(worst, std::min(d, period - d));
    }
    return worst;
}

}  // namespace edgeshift
