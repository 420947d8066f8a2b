#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "padp/scenario.hpp"

using namespace padp;

TEST_CASE("preset catalog covers the benchmark grids") {
    const auto& catalog = preset_catalog();
    std::map<std::string, int> family_counts;
    std::set<std::string> names;
    for (const auto& p : catalog) {
        ++family_counts[p.family];
        CHECK(names.insert(p.name).second);  // unique names
        CHECK_NOTHROW(p.config.validate());
    }
    CHECK(family_counts["m3-grid"] == 36);  // 6 slope pairs x 6 cost cells
    CHECK(family_counts["structure"] == 3);
    CHECK(family_counts["m5-grid"] == 30);
    CHECK(family_counts["m8-grid"] == 30);
    CHECK(family_counts["impact"] == 48);  // 8 endogeneity settings x 6 cost cells
    CHECK(family_counts["case"] == 6);
}

TEST_CASE("the catalog holds exactly the five m=5 shelf-life rows") {
    std::set<std::vector<double>> shelf_rows;
    for (const auto& p : preset_catalog()) {
        if (p.family != "m5-grid") continue;
        const auto s = p.config.problem.shelf.slopes();
        std::vector<double> key(s.begin(), s.end());
        const auto c = p.config.problem.shelf.intercepts();
        key.insert(key.end(), c.begin(), c.end());
        shelf_rows.insert(key);
    }
    CHECK(shelf_rows.size() == 5);
    // baseline endogenous row present with its published coefficients
    const auto endo = find_preset("m5-endo-f100-th20");
    REQUIRE(endo.has_value());
    const auto slopes = endo->problem.shelf.slopes();
    CHECK(slopes[0] == -0.03);
    CHECK(slopes[1] == -0.06);
    CHECK(slopes[2] == -0.03);
    CHECK(slopes[3] == -0.09);
}

TEST_CASE("impact grid includes the strongest negative pairs") {
    const auto d7 = find_preset("impact-d7-f10-th5");
    REQUIRE(d7.has_value());
    CHECK(d7->problem.shelf.slopes()[0] == -0.35);
    CHECK(d7->problem.shelf.slopes()[1] == -0.25);
    const auto d8 = find_preset("impact-d8-f100-th80");
    REQUIRE(d8.has_value());
    CHECK(d8->problem.shelf.slopes()[0] == -0.4);
    CHECK(d8->problem.shelf.slopes()[1] == -0.3);
    CHECK(d8->problem.costs.fixed == 100.0);
    CHECK(d8->problem.costs.wastage == 80.0);
}

TEST_CASE("m=3 presets start from the exact base distribution") {
    const auto cfg = find_preset("m3-exo-f10-th20");
    REQUIRE(cfg.has_value());
    const auto p = cfg->problem.shelf.probabilities(0);
    CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("configuration text round-trips exactly") {
    auto cfg = *find_preset("m3-neg2-f100-th80");
    cfg.seed = 99;
    cfg.adp.choice = 4;
    const std::string a = save_config_text(cfg);
    const auto back = load_config_text(a);
    CHECK(save_config_text(back) == a);

    // point-mass demand round-trips too
    ScenarioConfig stub;
    stub.problem.demand = PeriodicDemandModel::point_mass({3, 0, 1}, 10);
    stub.problem.shelf = ShelfLifeModel(3, {0.5, 0.2}, {0.0, 0.1});
    stub.problem.max_order = 10;
    stub.problem.x_cap = 10;
    const std::string b = save_config_text(stub);
    CHECK(save_config_text(load_config_text(b)) == b);
}

TEST_CASE("preset inheritance with overrides") {
    const auto cfg = load_config_text(
        "preset = m3-pos1-f10-th5\n"
        "cost.wastage = 40\n"
        "seed = 7\n"
        "adp.iterations = 3\n");
    CHECK(cfg.name == "m3-pos1-f10-th5");
    CHECK(cfg.problem.costs.wastage == 40.0);
    CHECK(cfg.problem.costs.fixed == 10.0);
    CHECK(cfg.seed == 7);
    CHECK(cfg.adp.iterations == 3);
}

TEST_CASE("config errors carry line and field context") {
    CHECK_THROWS_WITH_AS(load_config_text("preset = no-such-thing\n"),
                         doctest::Contains("unknown preset"), ConfigError);
    CHECK_THROWS_WITH_AS(load_config_text("preset = m3-exo-f10-th5\nbogus.key = 3\n"),
                         doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_WITH_AS(load_config_text("preset = m3-exo-f10-th5\nalpha = suspicious\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_AS(load_config_text("m = 3\n"), ConfigError);  // no shelf model
}

TEST_CASE("scale multipliers") {
    auto cfg = *find_preset("m5-endo-f10-th5");
    CHECK(cfg.adp.replications == 30);  // paper budgets by default
    CHECK(cfg.adp.iterations == 30);
    apply_scale(cfg, "desk");
    CHECK(cfg.adp.iterations == 12);  // savings come from iterations, not rows
    CHECK(cfg.adp.replications == 30);
    CHECK(cfg.bound.replications == 800);
    apply_scale(cfg, "smoke");
    CHECK(cfg.adp.iterations == 2);
    CHECK_THROWS_AS(apply_scale(cfg, "galactic"), std::invalid_argument);
}

TEST_CASE("demand variant knobs: doubled demand with truncation 30") {
    const auto cfg = load_config_text(
        "preset = m3-exo-f10-th5\n"
        "demand.n = 6.994672,21.966238,14.34635,22.19761,11.885052,10.979108,4.398094\n"
        "demand.delta = 11.32,13.84,13.0,12.34,11.64,6.66,6.86\n"
        "demand.truncation = 30\n"
        "max_order = 30\n"
        "x_cap = 30\n");
    CHECK(cfg.problem.demand.truncation() == 30);
    const auto m0 = cfg.problem.demand.effective_moments(0);
    CHECK(m0.mean == doctest::Approx(11.31).epsilon(0.002));
}
