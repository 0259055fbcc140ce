// Loads a model file (or a preset name), prints its edge coefficients and
// compares the predicted bound with the exact fiber minimum.
//
//   sample_usage samples/models/dipole.json

#include "edgeshift/edgeshift.hpp"

#include <iostream>

int main(int argc, char** argv) {
    using namespace edgeshift;
    try {
        RunConfig cfg;
        cfg.model = argc > 1 ? argv[1] : "dipole";
        const auto a = analyze(resolve_model(cfg), cfg.scan, cfg.tol);
        std::cout << a.model.name << ": " << a.minimizers.size() << " minimizer(s)\n";
        for (const auto& md : a.minimizers) {
            const auto& e = md.coeffs;
            std::cout << "  theta = " << json(e.theta).dump() << ", p = " << e.p << ", case = " << to_string(e.edge_case)
                      << ", first order = " << e.first_order() << ", second order = " << e.second_order() << '\n';
            for (double eps : {1e-3, 1e-2, 1e-1}) {
                const auto fm = fiber_min_over_q(a.model.h, a.model.v, a.model.support, e.theta, eps);
                std::cout << "    eps = " << eps << "  bound = " << edge_bound(e, eps).value
                          << "  fiber minimum = " << fm.value << " (q* = " << fm.q_star << ")\n";
            }
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
