#pragma once

// Lattice geometry, the periodic hopping operator, the single-cell potential
// and the disorder support.
//
// Sites of the periodicity cell [0, N-1]^d are indexed lexicographically with
// the first coordinate most significant: index(x) = sum_i x_i N^(d-1-i). Every
// matrix in the library uses this order.

#include "edgeshift/core.hpp"

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace edgeshift {

class LatticeGeometry {
public:
    LatticeGeometry(int dimension, int period) : d_(dimension), n_(period) {
        if (d_ < 1) throw std::invalid_argument("LatticeGeometry: dimension must be >= 1");
        if (n_ < 1) throw std::invalid_argument("LatticeGeometry: period must be >= 1");
        cell_size_ = 1;
        for (int i = 0; i < d_; ++i) cell_size_ *= n_;
    }

    int dimension() const { return d_; }
    int period() const { return n_; }
    int cell_size() const { return cell_size_; }

    /// Brillouin zone edge: each theta component lives in [0, 2 pi / N).
    double zone_length() const { return kTwoPi / n_; }

    std::vector<int> site_coords(int index) const {
        std::vector<int> x(d_);
        for (int i = d_ - 1; i >= 0; --i) {
            x[i] = index % n_;
            index /= n_;
        }
        return x;
    }

    int site_index(const std::vector<int>& x) const {
        int idx = 0;
        for (int i = 0; i < d_; ++i) {
            if (x[i] < 0 || x[i] >= n_) throw std::out_of_range("site_index: coordinate outside the cell");
            idx = idx * n_ + x[i];
        }
        return idx;
    }

    bool operator==(const LatticeGeometry&) const = default;

private:
    int d_;
    int n_;
    int cell_size_;
};

/// Key of one hopping amplitude H0(k, k' + m): source cell site k, target cell
/// site k', and the sublattice vector m (in lattice units, a multiple of N).
struct HopKey {
    int k = 0;
    int k_prime = 0;
    std::vector<int> m;

    auto operator<=>(const HopKey&) const = default;
};

/// The gamma-periodic finite-range operator H0 stored as a hopping table.
class HoppingOperator {
public:
    using Table = std::map<HopKey, cplx>;

    /// One row entry in cell units, for fast application.
    struct Hop {
        int k_prime;
        std::vector<int> cell_offset;
        cplx value;
    };

    HoppingOperator(LatticeGeometry geometry, Table coefficients, double energy_shift = 0.0)
        : geometry_(geometry), table_(std::move(coefficients)), energy_shift_(energy_shift) {
        const int n = geometry_.period();
        const int cs = geometry_.cell_size();
        rows_.assign(cs, {});
        for (const auto& [key, value] : table_) {
            if (key.k < 0 || key.k >= cs || key.k_prime < 0 || key.k_prime >= cs)
                throw std::invalid_argument("HoppingOperator: site index outside the cell");
            if (static_cast<int>(key.m.size()) != geometry_.dimension())
                throw std::invalid_argument("HoppingOperator: m has wrong dimension");
            std::vector<int> offset(key.m.size());
            for (std::size_t i = 0; i < key.m.size(); ++i) {
                if (key.m[i] % n != 0)
                    throw std::invalid_argument("HoppingOperator: m is not a sublattice vector");
                if (std::abs(key.m[i]) > n)
                    throw std::invalid_argument("HoppingOperator: hopping range exceeds the period (|m|_inf > N)");
                offset[i] = key.m[i] / n;
            }
            rows_[key.k].push_back(Hop{key.k_prime, std::move(offset), value});
        }
    }

    /// Builds the table from a translation-invariant kernel f(x, y) on Z^d.
    /// Only pairs with y - x inside the neighbouring cells are queried.
    static HoppingOperator from_kernel(LatticeGeometry geometry,
                                       const std::function<cplx(const std::vector<int>&, const std::vector<int>&)>& f) {
        const int d = geometry.dimension();
        const int n = geometry.period();
        int offsets = 1;
        for (int i = 0; i < d; ++i) offsets *= 3;
        Table table;
        for (int k = 0; k < geometry.cell_size(); ++k) {
            const auto x = geometry.site_coords(k);
            for (int o = 0; o < offsets; ++o) {
                std::vector<int> m(d);
                int rest = o;
                for (int i = d - 1; i >= 0; --i) {
                    m[i] = (rest % 3 - 1) * n;
                    rest /= 3;
                }
                for (int kp = 0; kp < geometry.cell_size(); ++kp) {
                    auto y = geometry.site_coords(kp);
                    for (int i = 0; i < d; ++i) y[i] += m[i];
                    const cplx v = f(x, y);
                    if (v != cplx(0.0)) table[HopKey{k, kp, m}] = v;
                }
            }
        }
        return HoppingOperator(geometry, std::move(table));
    }

    const LatticeGeometry& geometry() const { return geometry_; }
    const Table& coefficients() const { return table_; }
    double energy_shift() const { return energy_shift_; }
    const std::vector<Hop>& row(int k) const { return rows_.at(k); }

    cplx coefficient(int k, int k_prime, const std::vector<int>& m) const {
        auto it = table_.find(HopKey{k, k_prime, m});
        return it == table_.end() ? cplx(0.0) : it->second;
    }

    /// Returns H0 - shift * Id; the recorded energy shift accumulates.
    HoppingOperator shifted_by(double shift) const {
        if (shift == 0.0) return *this;
        Table t = table_;
        const std::vector<int> zero(geometry_.dimension(), 0);
        for (int k = 0; k < geometry_.cell_size(); ++k) {
            auto& entry = t[HopKey{k, k, zero}];
            entry -= shift;
        }
        return HoppingOperator(geometry_, std::move(t), energy_shift_ + shift);
    }

    /// Largest |coefficient|; zero for an empty table.
    double max_abs() const {
        double m = 0.0;
        for (const auto& [key, v] : table_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    LatticeGeometry geometry_;
    Table table_;
    double energy_shift_;
    std::vector<std::vector<Hop>> rows_;
};

/// The discrete Laplacian -Delta on Z^d (diagonal 2d, nearest neighbours -1)
/// plus an optional real on-site potential W given on the cell.
inline HoppingOperator laplacian(LatticeGeometry geometry, std::vector<double> onsite = {}) {
    if (!onsite.empty() && static_cast<int>(onsite.size()) != geometry.cell_size())
        throw std::invalid_argument("laplacian: on-site potential must have cell_size entries");
    const int d = geometry.dimension();
    const int n = geometry.period();
    return HoppingOperator::from_kernel(geometry, [&](const std::vector<int>& x, const std::vector<int>& y) {
        int l1 = 0;
        for (int i = 0; i < d; ++i) l1 += std::abs(x[i] - y[i]);
        if (l1 == 0) {
            double w = 0.0;
            if (!onsite.empty()) {
                std::vector<int> cell(d);
                for (int i = 0; i < d; ++i) cell[i] = ((x[i] % n) + n) % n;
                w = onsite[geometry.site_index(cell)];
            }
            return cplx(2.0 * d + w);
        }
        return l1 == 1 ? cplx(-1.0) : cplx(0.0);
    });
}

/// The Hermitian single-cell potential V on the periodicity cell.
class SingleCellPotential {
public:
    explicit SingleCellPotential(CMatrix matrix) : matrix_(std::move(matrix)) {
        if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("SingleCellPotential: matrix must be square");
        is_diagonal_ = matrix_.isDiagonal(0.0);
    }

    static SingleCellPotential diagonal(const std::vector<double>& values) {
        CMatrix m = CMatrix::Zero(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
        return SingleCellPotential(std::move(m));
    }

    const CMatrix& matrix() const { return matrix_; }
    bool is_diagonal() const { return is_diagonal_; }
    int size() const { return static_cast<int>(matrix_.rows()); }
    double norm() const { return hermitian_norm(matrix_); }

    SingleCellPotential scaled(double c) const { return SingleCellPotential(c * matrix_); }

private:
    CMatrix matrix_;
    bool is_diagonal_ = false;
};

enum class Regime { SignChanging, Positive };

inline std::string to_string(Regime r) { return r == Regime::SignChanging ? "sign_changing" : "positive"; }

inline Regime regime_from_string(const std::string& s) {
    if (s == "sign_changing" || s == "SignChanging" || s == "hypc") return Regime::SignChanging;
    if (s == "positive" || s == "Positive" || s == "hypc_prime") return Regime::Positive;
    throw std::invalid_argument("unknown disorder regime '" + s + "'");
}

/// Endpoints of the coupling support and the sign regime they are meant to satisfy.
struct DisorderSupport {
    double s_minus = -1.0;
    double s_plus = 1.0;
    Regime regime = Regime::SignChanging;

    bool consistent() const {
        if (regime == Regime::SignChanging) return s_minus < 0.0 && 0.0 < s_plus;
        return 0.0 <= s_minus && s_minus < s_plus;
    }

    double max_abs() const { return std::max(std::abs(s_minus), std::abs(s_plus)); }
};

}  // namespace edgeshift
