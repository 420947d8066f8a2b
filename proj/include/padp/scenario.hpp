#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padp/adp.hpp"
#include "padp/io.hpp"
#include "padp/mdp.hpp"

namespace padp {

struct SolverSettings {
    double tol = 1e-6;
    int max_iters = 5000;
};

struct AdpSettings {
    int choice = 2;
    int replications = 30;  // trajectories per iteration
    int horizon = 100;
    int iterations = 30;
    int n_mc = 1000;
    int exact_budget = 512;
    int tail_exclude = -1;
    int eval_replications = -1;
    double ls_rcond = 0.01;  // singular-value cutoff of the per-period fits
};

struct EvalSettings {
    int replications = 200;
    int horizon = 100;
};

struct BoundSettings {
    int replications = 4000;
};

struct RefitSettings {
    int periods = 0;  // 0: use adp.replications * adp.horizon
};

// A full experiment description: the model, solver budgets, seeds. Presets
// encode the benchmark grids; any field can be overridden from a config file.
struct ScenarioConfig {
    std::string name = "custom";
    Problem problem;
    SolverSettings solver;
    AdpSettings adp;
    EvalSettings eval;
    BoundSettings bound;
    RefitSettings refit;
    std::uint64_t seed = 1;
    int workers = 0;  // 0: all hardware threads
    std::string scale = "paper";  // the budgets the defaults correspond to

    void validate() const {
        problem.validate();
        if (solver.tol <= 0 || solver.max_iters < 1) throw std::invalid_argument("bad solver settings");
        if (adp.choice < 1 || adp.choice > 4) throw std::invalid_argument("bad basis choice");
        if (adp.replications < 1 || adp.horizon < 1 || adp.iterations < 1 || adp.n_mc < 1)
            throw std::invalid_argument("bad adp budgets");
        if (eval.replications < 2 || eval.horizon < 1)
            throw std::invalid_argument("bad evaluation budgets");
        if (bound.replications < 2) throw std::invalid_argument("bad bound budget");
        if (scale != "paper" && scale != "desk" && scale != "smoke")
            throw std::invalid_argument("scale must be paper, desk or smoke");
        if (workers < 0) throw std::invalid_argument("workers must be >= 0");
    }

    int refit_periods() const {
        return refit.periods > 0 ? refit.periods : adp.replications * adp.horizon;
    }

    ApiOptions api_options() const {
        ApiOptions o;
        o.choice = adp.choice;
        o.replications = adp.replications;
        o.horizon = adp.horizon;
        o.iterations = adp.iterations;
        o.n_mc = adp.n_mc;
        o.exact_budget = adp.exact_budget;
        o.tail_exclude = adp.tail_exclude;
        o.eval_replications = adp.eval_replications;
        o.ls_rcond = adp.ls_rcond;
        o.seed = seed;
        o.workers = effective_workers();
        return o;
    }

    int effective_workers() const { return workers > 0 ? workers : default_workers(); }
};

// Replication budgets per scale: "paper" is the full study configuration,
// "desk" a roughly quarter-cost variant for acceptance runs, "smoke" a tiny
// budget for quick checks.
inline void apply_scale(ScenarioConfig& cfg, const std::string& scale) {
    cfg.scale = scale;
    if (scale == "paper") {
        cfg.adp.replications = 30;
        cfg.adp.iterations = 30;
        cfg.adp.horizon = 100;
        cfg.adp.n_mc = 1000;
        cfg.adp.eval_replications = 100;
        cfg.eval.replications = 500;
        cfg.eval.horizon = 100;
        cfg.bound.replications = 4000;
    } else if (scale == "desk") {
        // trajectory count per iteration is not reduced: the per-period
        // regressions need the row count to stay well posed; savings come
        // from fewer iterations and smaller evaluation/bound budgets
        cfg.adp.replications = 30;
        cfg.adp.iterations = 12;
        cfg.adp.horizon = 100;
        cfg.adp.n_mc = 300;
        cfg.adp.eval_replications = 50;
        cfg.eval.replications = 100;
        cfg.eval.horizon = 100;
        cfg.bound.replications = 800;
    } else if (scale == "smoke") {
        cfg.adp.replications = 2;
        cfg.adp.iterations = 2;
        cfg.adp.horizon = 50;
        cfg.adp.n_mc = 100;
        cfg.adp.eval_replications = 10;
        cfg.eval.replications = 10;
        cfg.eval.horizon = 50;
        cfg.bound.replications = 50;
    } else {
        throw std::invalid_argument("unknown scale: " + scale);
    }
}

// ---- preset catalog ---------------------------------------------------------

struct CostCell {
    std::string tag;
    double fixed;
    double wastage;
};

namespace preset_detail {

inline const std::vector<CostCell>& benchmark_cost_cells() {
    // h = 1, l = 20, wastage in {l/4, l, 4l}
    static const std::vector<CostCell> cells{
        {"f10-th5", 10.0, 5.0},   {"f10-th20", 10.0, 20.0},   {"f10-th80", 10.0, 80.0},
        {"f100-th5", 100.0, 5.0}, {"f100-th20", 100.0, 20.0}, {"f100-th80", 100.0, 80.0},
    };
    return cells;
}

inline const std::vector<CostCell>& case_cost_cells() {
    // hospital study: f in {10, 20}, wastage in {l/10, l/4, l}
    static const std::vector<CostCell> cells{
        {"f10-th2", 10.0, 2.0},  {"f10-th5", 10.0, 5.0},  {"f10-th20", 10.0, 20.0},
        {"f20-th2", 20.0, 2.0},  {"f20-th5", 20.0, 5.0},  {"f20-th20", 20.0, 20.0},
    };
    return cells;
}

// m = 3 rows share the base distribution (p1, p2, p3) = (0.2, 0.5, 0.3).
inline ShelfLifeModel m3_logit(double slope2, double slope3) {
    return ShelfLifeModel(3, {std::log(2.5), std::log(1.5)}, {slope2, slope3});
}

struct ShelfRow {
    std::string tag;
    ShelfLifeModel model;
};

inline const std::vector<ShelfRow>& m3_rows() {
    static const std::vector<ShelfRow> rows{
        {"m3-pos2", m3_logit(0.4, 0.8)},    {"m3-pos1", m3_logit(0.2, 0.4)},
        {"m3-exo", m3_logit(0.0, 0.0)},     {"m3-neg1", m3_logit(-0.1, -0.05)},
        {"m3-neg2", m3_logit(-0.2, -0.1)},  {"m3-neg3", m3_logit(-0.4, -0.8)},
    };
    return rows;
}

inline const std::vector<ShelfRow>& impact_rows() {
    static const std::vector<ShelfRow> rows{
        {"impact-d1", m3_logit(0.4, 0.8)},     {"impact-d2", m3_logit(0.2, 0.4)},
        {"impact-d3", m3_logit(-0.15, -0.05)}, {"impact-d4", m3_logit(-0.2, -0.1)},
        {"impact-d5", m3_logit(-0.25, -0.15)}, {"impact-d6", m3_logit(-0.3, -0.2)},
        {"impact-d7", m3_logit(-0.35, -0.25)}, {"impact-d8", m3_logit(-0.4, -0.3)},
    };
    return rows;
}

inline const std::vector<ShelfRow>& m5_rows() {
    static const std::vector<ShelfRow> rows{
        {"m5-exo", ShelfLifeModel(5, {1.6, 2.6, 2.8, 1.6}, {0, 0, 0, 0})},
        {"m5-endo", ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.03, -0.06, -0.03, -0.09})},
        {"m5-sens1", ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.03, -0.06, -0.08, -0.09})},
        {"m5-sens2", ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.05, -0.1, -0.15, -0.2})},
        {"m5-sens3", ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.1, -0.2, -0.3, -0.4})},
    };
    return rows;
}

inline const std::vector<ShelfRow>& m8_rows() {
    static const std::vector<double> c0{0.8, 1.4, 1.9, 2.3, 1.7, 1.2, 0.8};
    static const std::vector<ShelfRow> rows{
        {"m8-exo", ShelfLifeModel(8, c0, {0, 0, 0, 0, 0, 0, 0})},
        {"m8-endo", ShelfLifeModel(8, c0, {-0.03, -0.04, -0.05, -0.06, -0.07, -0.08, -0.09})},
        {"m8-sens1", ShelfLifeModel(8, c0, {-0.06, -0.08, -0.1, -0.12, -0.14, -0.16, -0.18})},
        {"m8-sens2", ShelfLifeModel(8, c0, {-0.12, -0.16, -0.2, -0.24, -0.28, -0.32, -0.36})},
        {"m8-sens3", ShelfLifeModel(8, c0, {-0.24, -0.32, -0.4, -0.48, -0.56, -0.64, -0.72})},
    };
    return rows;
}

inline ScenarioConfig base_scenario(const std::string& name, const ShelfLifeModel& shelf,
                                    double fixed, double wastage) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.problem.demand = weekly_platelet_demand(20);
    cfg.problem.shelf = shelf;
    cfg.problem.costs = {fixed, 1.0, 20.0, wastage, 0.95};
    cfg.problem.max_order = 20;
    cfg.problem.x_cap = 20;
    return cfg;
}

}  // namespace preset_detail

struct PresetInfo {
    std::string name;
    std::string family;  // m3-grid | structure | m5-grid | m8-grid | impact | case
    ScenarioConfig config;
};

inline const std::vector<PresetInfo>& preset_catalog() {
    using namespace preset_detail;
    static const std::vector<PresetInfo> catalog = [] {
        std::vector<PresetInfo> out;
        const auto add = [&](const std::string& family, const std::string& name,
                             const ShelfLifeModel& shelf, double f, double th) {
            out.push_back({name, family, base_scenario(name, shelf, f, th)});
        };
        for (const auto& row : m3_rows())
            for (const auto& cell : benchmark_cost_cells())
                add("m3-grid", row.tag + "-" + cell.tag, row.model, cell.fixed, cell.wastage);
        // structural study: slopes (0.4, 0.8), theta = 5, fixed cost on/off
        add("structure", "fig1-f10", m3_logit(0.4, 0.8), 10.0, 5.0);
        add("structure", "fig1-f0", m3_logit(0.4, 0.8), 0.0, 5.0);
        add("structure", "fig1-f0-deter", ShelfLifeModel::deterministic_fresh(3), 0.0, 5.0);
        for (const auto& row : m5_rows())
            for (const auto& cell : benchmark_cost_cells())
                add("m5-grid", row.tag + "-" + cell.tag, row.model, cell.fixed, cell.wastage);
        for (const auto& row : m8_rows())
            for (const auto& cell : benchmark_cost_cells())
                add("m8-grid", row.tag + "-" + cell.tag, row.model, cell.fixed, cell.wastage);
        for (const auto& row : impact_rows())
            for (const auto& cell : benchmark_cost_cells())
                add("impact", row.tag + "-" + cell.tag, row.model, cell.fixed, cell.wastage);
        for (const auto& cell : case_cost_cells())
            add("case", "case-" + cell.tag,
                ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.03, -0.06, -0.03, -0.09}),
                cell.fixed, cell.wastage);
        return out;
    }();
    return catalog;
}

inline std::optional<ScenarioConfig> find_preset(const std::string& name) {
    for (const auto& p : preset_catalog())
        if (p.name == name) return p.config;
    return std::nullopt;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : preset_catalog()) names.push_back(p.name);
    return names;
}

// ---- plain-text configuration files -----------------------------------------
// `key = value` lines, '#' comments. A `preset = NAME` line imports that
// preset first; later keys override individual fields. Saved files contain
// every resolved field, so load(save(cfg)) == cfg.

namespace config_detail {

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& cell : split(s, ','))
        if (!trim(cell).empty()) out.push_back(parse_double(trim(cell)));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& cell : split(s, ','))
        if (!trim(cell).empty()) out.push_back(static_cast<int>(parse_long(trim(cell))));
    return out;
}

inline std::string join_doubles(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

inline std::string join_ints(std::span<const int> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace config_detail

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string save_config_text(const ScenarioConfig& cfg) {
    using namespace config_detail;
    std::string s;
    const auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    kv("name", cfg.name);
    kv("m", std::to_string(cfg.problem.m()));
    kv("max_order", std::to_string(cfg.problem.max_order));
    kv("x_cap", std::to_string(cfg.problem.x_cap));
    kv("alpha", format_double(cfg.problem.costs.discount));
    kv("cost.fixed", format_double(cfg.problem.costs.fixed));
    kv("cost.holding", format_double(cfg.problem.costs.holding));
    kv("cost.shortage", format_double(cfg.problem.costs.shortage));
    kv("cost.wastage", format_double(cfg.problem.costs.wastage));
    if (cfg.problem.demand.is_point_mass()) {
        kv("demand.kind", "point");
        kv("demand.point", join_ints(cfg.problem.demand.point_values()));
    } else {
        kv("demand.kind", "nbinom");
        kv("demand.n", join_doubles(cfg.problem.demand.n_params()));
        kv("demand.delta", join_doubles(cfg.problem.demand.delta_params()));
    }
    kv("demand.truncation", std::to_string(cfg.problem.demand.truncation()));
    kv("shelf.intercepts", join_doubles(cfg.problem.shelf.intercepts()));
    kv("shelf.slopes", join_doubles(cfg.problem.shelf.slopes()));
    kv("solver.tol", format_double(cfg.solver.tol));
    kv("solver.max_iters", std::to_string(cfg.solver.max_iters));
    kv("adp.choice", std::to_string(cfg.adp.choice));
    kv("adp.replications", std::to_string(cfg.adp.replications));
    kv("adp.horizon", std::to_string(cfg.adp.horizon));
    kv("adp.iterations", std::to_string(cfg.adp.iterations));
    kv("adp.n_mc", std::to_string(cfg.adp.n_mc));
    kv("adp.exact_budget", std::to_string(cfg.adp.exact_budget));
    kv("adp.tail_exclude", std::to_string(cfg.adp.tail_exclude));
    kv("adp.eval_replications", std::to_string(cfg.adp.eval_replications));
    kv("adp.ls_rcond", format_double(cfg.adp.ls_rcond));
    kv("eval.replications", std::to_string(cfg.eval.replications));
    kv("eval.horizon", std::to_string(cfg.eval.horizon));
    kv("bound.replications", std::to_string(cfg.bound.replications));
    kv("refit.periods", std::to_string(cfg.refit.periods));
    kv("seed", std::to_string(cfg.seed));
    kv("workers", std::to_string(cfg.workers));
    kv("scale", cfg.scale);
    return s;
}

inline ScenarioConfig load_config_text(const std::string& text) {
    using namespace config_detail;
    ScenarioConfig cfg;
    // staged model fields (the model objects are immutable once built)
    int m = 3, truncation = 20;
    std::string demand_kind = "nbinom";
    std::vector<double> dn, dd, intercepts, slopes;
    std::vector<int> dpoint;
    bool have_shelf = false, have_demand = false;

    int line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "preset") {
                const auto preset = find_preset(value);
                if (!preset) throw ConfigError("unknown preset '" + value + "'");
                cfg = *preset;
                m = cfg.problem.m();
                truncation = cfg.problem.demand.truncation();
                demand_kind = cfg.problem.demand.is_point_mass() ? "point" : "nbinom";
                dn.assign(cfg.problem.demand.n_params().begin(),
                          cfg.problem.demand.n_params().end());
                dd.assign(cfg.problem.demand.delta_params().begin(),
                          cfg.problem.demand.delta_params().end());
                dpoint.assign(cfg.problem.demand.point_values().begin(),
                              cfg.problem.demand.point_values().end());
                intercepts.assign(cfg.problem.shelf.intercepts().begin(),
                                  cfg.problem.shelf.intercepts().end());
                slopes.assign(cfg.problem.shelf.slopes().begin(),
                              cfg.problem.shelf.slopes().end());
                have_shelf = have_demand = true;
            } else if (key == "name") cfg.name = value;
            else if (key == "m") m = static_cast<int>(parse_long(value));
            else if (key == "max_order") cfg.problem.max_order = static_cast<int>(parse_long(value));
            else if (key == "x_cap") cfg.problem.x_cap = static_cast<int>(parse_long(value));
            else if (key == "alpha") cfg.problem.costs.discount = parse_double(value);
            else if (key == "cost.fixed") cfg.problem.costs.fixed = parse_double(value);
            else if (key == "cost.holding") cfg.problem.costs.holding = parse_double(value);
            else if (key == "cost.shortage") cfg.problem.costs.shortage = parse_double(value);
            else if (key == "cost.wastage") cfg.problem.costs.wastage = parse_double(value);
            else if (key == "demand.kind") { demand_kind = value; have_demand = true; }
            else if (key == "demand.n") { dn = parse_double_list(value); have_demand = true; }
            else if (key == "demand.delta") { dd = parse_double_list(value); have_demand = true; }
            else if (key == "demand.point") { dpoint = parse_int_list(value); have_demand = true; }
            else if (key == "demand.truncation") { truncation = static_cast<int>(parse_long(value)); have_demand = true; }
            else if (key == "shelf.intercepts") { intercepts = parse_double_list(value); have_shelf = true; }
            else if (key == "shelf.slopes") { slopes = parse_double_list(value); have_shelf = true; }
            else if (key == "solver.tol") cfg.solver.tol = parse_double(value);
            else if (key == "solver.max_iters") cfg.solver.max_iters = static_cast<int>(parse_long(value));
            else if (key == "adp.choice") cfg.adp.choice = static_cast<int>(parse_long(value));
            else if (key == "adp.replications") cfg.adp.replications = static_cast<int>(parse_long(value));
            else if (key == "adp.horizon") cfg.adp.horizon = static_cast<int>(parse_long(value));
            else if (key == "adp.iterations") cfg.adp.iterations = static_cast<int>(parse_long(value));
            else if (key == "adp.n_mc") cfg.adp.n_mc = static_cast<int>(parse_long(value));
            else if (key == "adp.exact_budget") cfg.adp.exact_budget = static_cast<int>(parse_long(value));
            else if (key == "adp.tail_exclude") cfg.adp.tail_exclude = static_cast<int>(parse_long(value));
            else if (key == "adp.eval_replications") cfg.adp.eval_replications = static_cast<int>(parse_long(value));
            else if (key == "adp.ls_rcond") cfg.adp.ls_rcond = parse_double(value);
            else if (key == "eval.replications") cfg.eval.replications = static_cast<int>(parse_long(value));
            else if (key == "eval.horizon") cfg.eval.horizon = static_cast<int>(parse_long(value));
            else if (key == "bound.replications") cfg.bound.replications = static_cast<int>(parse_long(value));
            else if (key == "refit.periods") cfg.refit.periods = static_cast<int>(parse_long(value));
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value));
            else if (key == "workers") cfg.workers = static_cast<int>(parse_long(value));
            else if (key == "scale") cfg.scale = value;
            else throw ConfigError("unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
        }
    }

    try {
        if (have_demand || !have_shelf) {
            if (demand_kind == "point") {
                if (dpoint.empty()) throw ConfigError("demand.kind = point needs demand.point");
                cfg.problem.demand = PeriodicDemandModel::point_mass(dpoint, truncation);
            } else if (demand_kind == "nbinom") {
                if (dn.empty() || dd.empty()) {
                    cfg.problem.demand = weekly_platelet_demand(truncation);
                } else {
                    cfg.problem.demand =
                        PeriodicDemandModel::negative_binomial(dn, dd, truncation);
                }
            } else {
                throw ConfigError("demand.kind must be nbinom or point");
            }
        }
        if (have_shelf || cfg.problem.shelf.max_shelf_life() != m) {
            if (intercepts.empty() && slopes.empty())
                throw ConfigError("shelf.intercepts / shelf.slopes required for m = " +
                                  std::to_string(m));
            if (slopes.empty()) slopes.assign(intercepts.size(), 0.0);
            cfg.problem.shelf = ShelfLifeModel(m, intercepts, slopes);
        }
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

}  // namespace padp
