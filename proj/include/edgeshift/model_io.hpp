#pragma once

// Model configuration files (JSON).
//
//   {
//     "dimension": 1, "period": 2,
//     "hoppings": [{"k": [0], "k_prime": [1], "m": [-2], "re": -1.0, "im": 0.0}, ...],
//     "potential": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
//     "disorder": {"s_minus": -1.0, "s_plus": 1.0, "regime": "sign_changing"}
//   }
//
// k and k_prime are cell-site coordinates (an integer lexicographic index is
// also accepted), m is a sublattice vector in lattice units, and "potential"
// lists the cell_size^2 entries of V row-major as [re, im] pairs. Optional
// fields: "name", "energy_shift".

#include "edgeshift/model.hpp"

#include "json.hpp"

#include <fstream>

namespace edgeshift {

using json = nlohmann::json;

namespace detail {

inline int read_site(const json& j, const LatticeGeometry& g) {
    if (j.is_number_integer()) {
        const int idx = j.get<int>();
        if (idx < 0 || idx >= g.cell_size()) throw std::invalid_argument("model json: site index out of range");
        return idx;
    }
    auto x = j.get<std::vector<int>>();
    if (static_cast<int>(x.size()) != g.dimension()) throw std::invalid_argument("model json: site has wrong dimension");
    return g.site_index(x);
}

}  // namespace detail

inline json model_to_json(const Model& m) {
    const auto& g = m.h.geometry();
    json j;
    j["name"] = m.name;
    j["dimension"] = g.dimension();
    j["period"] = g.period();
    j["energy_shift"] = m.h.energy_shift();
    json hops = json::array();
    for (const auto& [key, value] : m.h.coefficients()) {
        hops.push_back({{"k", g.site_coords(key.k)},
                        {"k_prime", g.site_coords(key.k_prime)},
                        {"m", key.m},
                        {"re", value.real()},
                        {"im", value.imag()}});
    }
    j["hoppings"] = std::move(hops);
    json pot = json::array();
    const auto& v = m.v.matrix();
    for (Eigen::Index r = 0; r < v.rows(); ++r)
        for (Eigen::Index c = 0; c < v.cols(); ++c) pot.push_back({v(r, c).real(), v(r, c).imag()});
    j["potential"] = std::move(pot);
    j["disorder"] = {{"s_minus", m.support.s_minus}, {"s_plus", m.support.s_plus}, {"regime", to_string(m.support.regime)}};
    return j;
}

inline Model model_from_json(const json& j) {
    try {
        const LatticeGeometry g(j.at("dimension").get<int>(), j.at("period").get<int>());
        HoppingOperator::Table table;
        for (const auto& hop : j.at("hoppings")) {
            HopKey key{detail::read_site(hop.at("k"), g), detail::read_site(hop.at("k_prime"), g),
                       hop.at("m").get<std::vector<int>>()};
            const cplx value(hop.at("re").get<double>(), hop.value("im", 0.0));
            if (!table.emplace(std::move(key), value).second)
                throw std::invalid_argument("model json: duplicate hopping entry");
        }
        HoppingOperator h(g, std::move(table), j.value("energy_shift", 0.0));

        const auto& pot = j.at("potential");
        const auto cs = static_cast<std::size_t>(g.cell_size());
        if (pot.size() != cs * cs)
            throw std::invalid_argument("model json: potential must list cell_size^2 = " + std::to_string(cs * cs) +
                                        " entries");
        CMatrix v(cs, cs);
        for (std::size_t i = 0; i < cs * cs; ++i) {
            const auto& e = pot.at(i);
            v(i / cs, i % cs) = e.is_array() ? cplx(e.at(0).get<double>(), e.size() > 1 ? e.at(1).get<double>() : 0.0)
                                             : cplx(e.get<double>(), 0.0);
        }

        DisorderSupport s;
        if (j.contains("disorder")) {
            const auto& dj = j.at("disorder");
            s.s_minus = dj.at("s_minus").get<double>();
            s.s_plus = dj.at("s_plus").get<double>();
            s.regime = regime_from_string(dj.value("regime", std::string("sign_changing")));
        }
        return Model{j.value("name", std::string("custom")), std::move(h), SingleCellPotential(std::move(v)), s};
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model json: ") + e.what());
    }
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

inline void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write model file " + path);
    out << model_to_json(m).dump(2) << '\n';
}

}  // namespace edgeshift
