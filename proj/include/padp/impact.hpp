#pragma once

#include <string>
#include <vector>

#include "padp/baselines.hpp"
#include "padp/scenario.hpp"

namespace padp {

// One cell of the ignoring-uncertainty study (exact route, m <= 3): policies
// built under deterministic or refit-exogenous shelf-life assumptions are
// evaluated exactly under the true endogenous model.
struct ImpactCell {
    std::string scenario;
    double v_star = 0.0;     // exact optimum at the empty start state
    double v_myopic = 0.0;
    double v_deter = 0.0;    // deterministic-shelf-life policy under the truth
    double v_exo_opt = 0.0;  // exogenous refit, data simulated under the optimal policy
    double v_exo_myo = 0.0;  // exogenous refit, data simulated under the myopic policy
    // In extreme cells the data policy never orders, so there is no delivery
    // data to refit from; the study then keeps the data policy itself.
    bool exo_opt_fallback = false;
    bool exo_myo_fallback = false;

    double gap_pct(double v) const { return 100.0 * (v - v_star) / v_star; }
};

inline ImpactCell run_impact_cell(const ScenarioConfig& cfg, const SolveOptions& solve) {
    if (cfg.problem.m() > 3)
        throw std::invalid_argument("impact study (exact route) supports m <= 3");
    ImpactCell cell;
    cell.scenario = cfg.name;

    const auto truth = value_iteration(cfg.problem, solve);
    cell.v_star = truth.values.v[0][0];

    GreedyEvaluator eval(cfg.problem, cfg.adp.exact_budget, cfg.adp.n_mc);
    const auto myopic = myopic_policy_table(cfg.problem, eval, solve.workers);
    cell.v_myopic = policy_value(cfg.problem, myopic, solve).v[0][0];

    const auto deter = deterministic_shelf_life_policy(cfg.problem, solve);
    cell.v_deter = policy_value(cfg.problem, deter.policy, solve).v[0][0];

    const auto exo_value = [&](const PolicyTable& data_table, double data_value,
                               bool& fell_back) {
        try {
            const auto refit = exogenous_refit(
                cfg.problem, PolicyHandle::lookup(data_table), cfg.refit_periods(),
                cfg.adp.horizon, cfg.seed, solve.workers, cfg.adp.n_mc, cfg.adp.exact_budget);
            Problem assumed = cfg.problem;
            assumed.shelf = refit.model;
            const auto exo = value_iteration(assumed, solve);
            return policy_value(cfg.problem, exo.policy, solve).v[0][0];
        } catch (const std::runtime_error&) {
            fell_back = true;  // no delivery data; the study keeps the data policy
            return data_value;
        }
    };
    cell.v_exo_opt = exo_value(truth.policy, cell.v_star, cell.exo_opt_fallback);
    cell.v_exo_myo = exo_value(myopic, cell.v_myopic, cell.exo_myo_fallback);
    return cell;
}

}  // namespace padp
