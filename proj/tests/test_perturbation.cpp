#include "catch2/catch_amalgamated.hpp"

#include "support.hpp"

using namespace edgeshift;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EdgeCoefficients coeffs_at_zero(const Model& m) {
    const auto g = ground_space(m.h, Theta(m.h.geometry().dimension(), 0.0));
    return edge_coefficients(g, m.v, m.support);
}

struct RandomCase {
    HoppingOperator h;
    GroundSpaceData g;
};

RandomCase random_case(std::mt19937_64& rng, int n) {
    const auto h = shift_to_zero(testing::random_hopping(rng, 1, n));
    const auto set = scan_theta_set(h);
    return {h, ground_space(h, set.minimizers.front())};
}

}  // namespace

TEST_CASE("preset coefficients") {
    SECTION("Anderson") {
        const auto e = coeffs_at_zero(preset_model(Preset::Anderson));
        CHECK(e.p == 1);
        CHECK_THAT(*e.A1, WithinAbs(-1.0, 1e-12));
        CHECK(*e.A2 == 0.0);
        CHECK(e.edge_case == EdgeCase::Linear);
        CHECK(e.nondegenerate);
        CHECK_FALSE(e.A1_prime);
    }
    SECTION("dipole") {
        const auto e = coeffs_at_zero(preset_model(Preset::Dipole));
        CHECK_THAT(*e.A1, WithinAbs(0.0, 1e-14));
        CHECK_THAT(*e.A2, WithinAbs(-0.25, 1e-12));
        CHECK(e.edge_case == EdgeCase::Quadratic);
    }
    SECTION("quartic") {
        const auto e = coeffs_at_zero(preset_model(Preset::Quartic));
        CHECK_THAT(*e.A1, WithinAbs(0.0, 1e-14));
        CHECK_THAT(*e.A2, WithinAbs(-1.0 / 18.0, 1e-12));
        CHECK(e.edge_case == EdgeCase::Quadratic);
    }
}

TEST_CASE("variational A2 agrees with the pseudoinverse formula") {
    for (auto p : {Preset::Dipole, Preset::Quartic}) {
        const auto m = preset_model(p);
        const auto g = ground_space(m.h, {0.0});
        const auto pm = perturbation_matrix(g, m.v);
        CHECK_THAT(coeff_A2_variational(g, pm, m.v, m.support), WithinAbs(coeff_A2(g, pm, m.v, m.support), 1e-8));
    }
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + trial % 4;
        const auto rc = random_case(rng, n);
        const auto v = testing::random_potential(rng, n);
        const DisorderSupport s{-0.7, 1.3, Regime::SignChanging};
        const auto pm = perturbation_matrix(rc.g, v);
        for (auto which : {Subspace::FullV0, Subspace::V01}) {
            const double exact = coeff_A2(rc.g, pm, v, s, which);
            CHECK_THAT(coeff_A2_variational(rc.g, pm, v, s, which), WithinAbs(exact, 1e-8 * std::max(1.0, std::abs(exact))));
        }
    }
}

TEST_CASE("A2 matches the curvature of the fiber eigenvalue for simple ground states") {
    std::mt19937_64 rng(29);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 15; ++trial) {
        const int n = 2 + trial % 3;
        const auto rc = random_case(rng, n);
        if (rc.g.p != 1) continue;
        const auto v = testing::random_potential(rng, n);
        const DisorderSupport s{-1.0, 1.0, Regime::SignChanging};
        const auto pm = perturbation_matrix(rc.g, v);
        const double a2 = coeff_A2(rc.g, pm, v, s);
        const double step = 1e-3;
        auto lam = [&](double e) { return fiber_lambda_min(rc.h, v, rc.g.theta, 1.0, e); };
        const double curvature = (lam(step) + lam(-step) - 2.0 * lam(0.0)) / (2.0 * step * step);
        CHECK_THAT(curvature, WithinAbs(a2, 1e-4 * std::max(1.0, std::abs(a2))));
        CHECK_THAT((lam(step) - lam(-step)) / (2.0 * step), WithinAbs(pm.P(0), 1e-5));
        ++checked;
    }
    CHECK(checked >= 10);
}

TEST_CASE("positive regime") {
    SECTION("dipole on [0, 1]: quadratic with A2' = -1/4") {
        auto m = preset_model(Preset::Dipole);
        m.support = {0.0, 1.0, Regime::Positive};
        const auto e = coeffs_at_zero(m);
        CHECK_FALSE(e.A1);
        CHECK_THAT(*e.A1_prime, WithinAbs(0.0, 1e-14));
        CHECK_THAT(*e.A2_prime, WithinAbs(-0.25, 1e-12));
        CHECK(*e.V01_dim == 1);
        CHECK(e.edge_case == EdgeCase::Quadratic);
        CHECK_THAT(edge_bound(e, 0.01).value, WithinAbs(-0.25e-4, 1e-16));
    }
    SECTION("Anderson on [0, 1]: linear with a zero bound") {
        auto m = preset_model(Preset::Anderson);
        m.support = {0.0, 1.0, Regime::Positive};
        const auto e = coeffs_at_zero(m);
        CHECK(e.edge_case == EdgeCase::Linear);
        CHECK(*e.A1_prime == 0.0);
        CHECK(edge_bound(e, 0.1).value == 0.0);
    }
    SECTION("dimer with off-diagonal V") {
        const auto m = load_model(EDGESHIFT_SOURCE_DIR "/samples/models/dimer_offdiagonal.json");
        const auto e = coeffs_at_zero(m);
        CHECK(e.edge_case == EdgeCase::Quadratic);
        CHECK_THAT(e.second_order(), WithinAbs(-0.25, 1e-12));
    }
    SECTION("sign-changing only API is refused") {
        const auto m = preset_model(Preset::Anderson);
        const auto pm = perturbation_matrix(ground_space(m.h, {0.0}), m.v);
        CHECK_THROWS_AS(coeff_A1(pm, DisorderSupport{0.0, 1.0, Regime::Positive}), std::invalid_argument);
        CHECK_THROWS_AS(coeffs_positive_regime(ground_space(m.h, {0.0}), pm, m.v, m.support), std::invalid_argument);
    }
}

TEST_CASE("V annihilating the ground state gives no motion") {
    auto m = preset_model(Preset::Dipole);
    CMatrix v(2, 2);
    v << 1.0, -1.0, -1.0, 1.0;
    m.v = SingleCellPotential(v);
    const auto e = coeffs_at_zero(m);
    CHECK(e.edge_case == EdgeCase::NoMotion);
    CHECK_FALSE(e.nondegenerate);
    CHECK(edge_bound(e, 0.05).value == 0.0);
}

TEST_CASE("nondegeneracy holds exactly when the edge moves") {
    std::mt19937_64 rng(31);
    int degenerate = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 4;
        const auto rc = random_case(rng, n);
        CMatrix v = testing::random_potential(rng, n).matrix();
        if (trial % 3 == 0) {
            const CMatrix q = CMatrix::Identity(n, n) - rc.g.basis * rc.g.basis.adjoint();
            v = q * v * q;
        }
        const auto pot = testing::exact_hermitian(v);
        if (pot.norm() == 0.0) continue;
        const auto e = edge_coefficients(rc.g, pot, DisorderSupport{});
        degenerate += e.nondegenerate ? 0 : 1;
        CHECK(e.nondegenerate == (e.edge_case != EdgeCase::NoMotion));
    }
    CHECK(degenerate > 0);
}

TEST_CASE("edge_bound") {
    const auto a = coeffs_at_zero(preset_model(Preset::Anderson));
    const auto b = edge_bound(a, 0.2);
    CHECK(b.value == -0.2);
    CHECK(b.large_epsilon);
    CHECK_FALSE(b.cubic_remainder);
    const auto q = edge_bound(coeffs_at_zero(preset_model(Preset::Dipole)), 0.01);
    CHECK(q.cubic_remainder);
    CHECK_FALSE(q.large_epsilon);
    CHECK_THROWS_AS(edge_bound(a, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(edge_bound(a, -1e-3), std::invalid_argument);
}

TEST_CASE("Perron-Frobenius check") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const LatticeGeometry g(1 + trial % 2, 1 + trial % 4);
        std::vector<double> w(g.cell_size());
        for (auto& x : w) x = testing::uniform(rng, -2.0, 2.0);
        const auto r = perron_frobenius_check(laplacian(g, w));
        CHECK(r.applicable);
        CHECK(r.passed());
        CHECK(r.min_entry > 0.0);
    }
    const auto quartic = perron_frobenius_check(preset_model(Preset::Quartic).h);
    CHECK_FALSE(quartic.applicable);
    CHECK_FALSE(quartic.passed());
    CHECK(is_alloy_form(preset_model(Preset::Dipole).h));
    CHECK_FALSE(is_alloy_form(preset_model(Preset::Quartic).h));
}
