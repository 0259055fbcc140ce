#include "catch2/catch_amalgamated.hpp"

#include "support.hpp"

#include <filesystem>

using namespace edgeshift;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("edgeshift_io_" + name)).string();
}

}  // namespace

TEST_CASE("models round-trip through JSON") {
    std::mt19937_64 rng(3);
    std::vector<Model> models{preset_model(Preset::Anderson), preset_model(Preset::Dipole), preset_model(Preset::Quartic)};
    auto h = testing::random_hopping(rng, 2, 2);
    models.push_back(Model{"random", h, testing::random_potential(rng, 4), DisorderSupport{0.0, 2.0, Regime::Positive}});
    for (const auto& m : models) {
        const auto back = model_from_json(json::parse(model_to_json(m).dump()));
        CHECK(back.name == m.name);
        CHECK(back.h.coefficients() == m.h.coefficients());
        CHECK(back.v.matrix() == m.v.matrix());
        CHECK(back.support.s_minus == m.support.s_minus);
        CHECK(back.support.s_plus == m.support.s_plus);
        CHECK(back.support.regime == m.support.regime);
    }
}

TEST_CASE("save and load") {
    const auto path = temp_path("dipole.json");
    save_model(preset_model(Preset::Dipole), path);
    const auto back = load_model(path);
    CHECK(back.h.coefficients() == preset_model(Preset::Dipole).h.coefficients());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), std::invalid_argument);
}

TEST_CASE("sample dipole file equals the preset") {
    const auto m = load_model(EDGESHIFT_SOURCE_DIR "/samples/models/dipole.json");
    const auto p = preset_model(Preset::Dipole);
    CHECK(m.h.coefficients() == p.h.coefficients());
    CHECK(m.v.matrix() == p.v.matrix());
}

TEST_CASE("integer site indices are accepted") {
    const auto m = load_model(EDGESHIFT_SOURCE_DIR "/samples/models/dimer_offdiagonal.json");
    CHECK(m.h.coefficients() == preset_model(Preset::Dipole).h.coefficients());
    CHECK(m.v.matrix()(0, 1) == cplx(0.0, 1.0));
    CHECK(m.support.regime == Regime::Positive);
}

TEST_CASE("malformed model files are rejected") {
    auto base = model_to_json(preset_model(Preset::Dipole));

    SECTION("duplicate hopping") {
        base["hoppings"].push_back(base["hoppings"][0]);
        CHECK_THROWS_WITH(model_from_json(base), ContainsSubstring("duplicate"));
    }
    SECTION("potential size") {
        base["potential"].erase(0);
        CHECK_THROWS_WITH(model_from_json(base), ContainsSubstring("cell_size^2"));
    }
    SECTION("missing field") {
        base.erase("period");
        CHECK_THROWS_AS(model_from_json(base), std::invalid_argument);
    }
    SECTION("site out of range") {
        base["hoppings"][0]["k"] = 7;
        CHECK_THROWS_AS(model_from_json(base), std::invalid_argument);
    }
    SECTION("bad regime") {
        base["disorder"]["regime"] = "neither";
        CHECK_THROWS_AS(model_from_json(base), std::invalid_argument);
    }
    SECTION("not JSON") {
        const auto path = temp_path("garbage.json");
        std::ofstream(path) << "{ not json";
        CHECK_THROWS_AS(load_model(path), std::invalid_argument);
        std::filesystem::remove(path);
    }
}
