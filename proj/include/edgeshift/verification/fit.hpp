#pragma once

// Least-squares power-law fits on log-log axes.

#include "edgeshift/core.hpp"

namespace edgeshift {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return f;
}

/// Slope of log|y| against log x, skipping points with y == 0.
inline LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 0.0 || x[i] <= 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::abs(y[i])));
    }
    return fit_line(lx, ly);
}

struct ExponentFit {
    std::vector<double> epsilons;
    std::vector<double> values;
    double eta = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    /// Indices of the input points that were dropped because value >= 0.
    std::vector<std::size_t> excluded;
};

/// Fits -value = prefactor * eps^eta using only the points with value < 0.
inline ExponentFit fit_exponent(const std::vector<double>& epsilons, const std::vector<double>& values) {
    if (epsilons.size() != values.size()) throw std::invalid_argument("fit_exponent: size mismatch");
    ExponentFit out;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] < 0.0) || !(epsilons[i] > 0.0)) {
            out.excluded.push_back(i);
            continue;
        }
        out.epsilons.push_back(epsilons[i]);
        out.values.push_back(values[i]);
        lx.push_back(std::log(epsilons[i]));
        ly.push_back(std::log(-values[i]));
    }
    if (lx.size() < 3)
        throw std::invalid_argument("fit_exponent: fewer than 3 negative values (" + std::to_string(lx.size()) + " usable)");
    const auto line = fit_line(lx, ly);
    out.eta = line.slope;
    out.prefactor = std::exp(line.intercept);
    out.r_squared = line.r_squared;
    return out;
}

}  // namespace edgeshift
