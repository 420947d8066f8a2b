#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "padp/bounds.hpp"
#include "padp/serialize.hpp"
#include "padp/impact.hpp"
#include "padp/structure.hpp"

namespace padp::cli {

namespace fs = std::filesystem;

struct RunLog {
    std::string text;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void note(const std::string& line) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        char stamp[32];
        std::snprintf(stamp, sizeof(stamp), "[%9.3fs] ", secs);
        text += stamp + line + "\n";
        std::cout << stamp << line << "\n";
    }
};

struct CommonOptions {
    std::string preset;
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> scale;
    std::optional<int> iters, reps, horizon, choice;
};

inline ScenarioConfig resolve_config(const CommonOptions& opt) {
    ScenarioConfig cfg;
    bool have = false;
    if (!opt.preset.empty()) {
        auto p = find_preset(opt.preset);
        if (!p) {
            std::string msg = "unknown preset '" + opt.preset + "'; valid presets:\n";
            for (const auto& name : preset_names()) msg += "  " + name + "\n";
            throw ConfigError(msg);
        }
        cfg = *p;
        have = true;
    }
    if (!opt.config_path.empty()) {
        const std::string text = read_text_file(opt.config_path);
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') {
            cfg = config_from_json(json::parse(text).at("config"));  // manifest rerun
        } else {
            cfg = load_config_text(text);
        }
        have = true;
    }
    if (!have) throw ConfigError("specify --preset or --config");
    if (opt.scale) apply_scale(cfg, *opt.scale);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.workers) cfg.workers = *opt.workers;
    if (opt.iters) cfg.adp.iterations = *opt.iters;
    if (opt.reps) cfg.adp.replications = *opt.reps;
    if (opt.horizon) {
        cfg.adp.horizon = *opt.horizon;
        cfg.eval.horizon = *opt.horizon;
    }
    if (opt.choice) cfg.adp.choice = *opt.choice;
    cfg.validate();
    return cfg;
}

inline void finish_run(const fs::path& out, const std::string& command,
                       const ScenarioConfig& cfg, std::vector<std::string> outputs, RunLog& log) {
    outputs.push_back("run.log");
    write_json_file(out / "manifest.json", make_manifest(command, cfg, outputs));
    log.note("wrote manifest.json");
    write_text_file(out / "run.log", log.text);
}

inline void mark_failed(const fs::path& out, const std::string& reason, RunLog& log) {
    log.note("FAILED: " + reason);
    write_text_file(out / "FAILED", reason + "\n");
    write_text_file(out / "run.log", log.text);
}

// ---- csv schemas (asserted by tests) ----------------------------------------

inline constexpr const char* kExactSummaryHeader =
    "scenario,value_start,residual,iterations,sensitivity_violations,nonconvexity_witnesses";
inline constexpr const char* kAdpIterationsHeader =
    "iteration,cost,ci_halfwidth,gap_pct,gap_ci,beta_l2,rank_deficient";
inline constexpr const char* kAdpSummaryHeader =
    "scenario,best_iteration,cost,ci_halfwidth,exact_value,exact_gap_pct,myopic_cost,"
    "myopic_gap_pct";
inline constexpr const char* kBoundSummaryHeader =
    "scenario,estimate,ci_halfwidth,standard_error,replications,exact_value,gap_pct";
inline constexpr const char* kMyopicSummaryHeader =
    "scenario,policy,cost,ci_halfwidth,exact_value,gap_pct";
inline constexpr const char* kReportHeader =
    "scenario,policy,cost,cost_ci,order_frequency,order_frequency_ci,total_orders,"
    "total_orders_ci,total_demand,avg_holding,avg_holding_ci,shortage_rate,shortage_rate_ci,"
    "expiry_rate,expiry_rate_ci,clamp_events,conservation_ok";
inline constexpr const char* kImpactHeader = "scenario,policy,cost,cost_ci,gap_pct,gap_ci";
inline constexpr const char* kWitnessHeader = "kind,tau,slice,index,second_difference";
inline constexpr const char* kViolationHeader = "tau,state,clause,delta_a,delta_b";

inline std::string report_csv_row(const std::string& scenario, const EvaluationReport& r) {
    std::string row = scenario + "," + r.policy;
    const auto add = [&](const SampleStats& s, bool with_ci = true) {
        row += "," + format_double(s.mean);
        if (with_ci) row += "," + format_double(s.ci_halfwidth());
    };
    add(r.cost);
    add(r.order_frequency);
    add(r.total_orders);
    row += "," + format_double(r.total_demand.mean);
    add(r.avg_holding);
    add(r.shortage_rate);
    add(r.expiry_rate);
    row += "," + std::to_string(r.clamp_events);
    row += std::string(",") + (r.conservation_ok ? "1" : "0");
    return row;
}

inline json report_to_json(const EvaluationReport& r) {
    json j;
    j["policy"] = r.policy;
    const auto stat = [](const SampleStats& s) {
        return json{{"mean", s.mean}, {"ci_halfwidth", s.ci_halfwidth()}, {"count", s.count}};
    };
    j["cost"] = stat(r.cost);
    j["order_frequency"] = stat(r.order_frequency);
    j["total_orders"] = stat(r.total_orders);
    j["total_demand"] = stat(r.total_demand);
    j["avg_holding"] = stat(r.avg_holding);
    j["shortage_rate"] = stat(r.shortage_rate);
    j["expiry_rate"] = stat(r.expiry_rate);
    j["weekday_post_delivery"] = r.weekday_post_delivery;
    j["clamp_events"] = r.clamp_events;
    j["clamped_demand_values"] = r.clamped_demand_values;
    j["conservation_ok"] = r.conservation_ok;
    j["replications"] = r.replications;
    j["horizon"] = r.horizon;
    return j;
}

// ---- structural witness extraction (shared by `exact` and the tests) --------

struct StructureScan {
    std::vector<SensitivityViolation> violations;
    std::vector<NonconvexityWitness> value_witnesses;
    // expected one-step cost along the order size, scanned at x1 = 8 rows
    struct QzWitness {
        int tau, x1, x2, index;
        double second_difference;
    };
    std::vector<QzWitness> qz_witnesses;
};

inline StructureScan scan_structure(const Problem& problem, const DpSolution& sol,
                                    int qz_tau = 0, int qz_x1 = 8, int qz_x2_max = 10) {
    StructureScan scan;
    scan.violations = find_sensitivity_violations(sol.policy);
    scan.value_witnesses = find_value_nonconvexities(sol.values);
    for (int x2 = 0; x2 <= qz_x2_max; ++x2) {
        std::vector<int> onhand(problem.m() - 1, 0);
        onhand[0] = qz_x1;
        if (problem.m() >= 3) onhand[1] = x2;
        const InventoryState s(qz_tau, onhand);
        const auto q = exact_q_values(problem, sol.values, s);
        for (int i : find_nonconvexity_indices(q))
            scan.qz_witnesses.push_back({qz_tau, qz_x1, x2, i, q[i + 1] - 2 * q[i] + q[i - 1]});
        if (problem.m() < 3) break;
    }
    return scan;
}

// ---- commands ----------------------------------------------------------------

inline int cmd_exact(const ScenarioConfig& cfg, const fs::path& out, RunLog& log) {
    const SolveOptions solve{cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()};
    log.note("value iteration on '" + cfg.name + "'");
    DpSolution sol;
    try {
        sol = value_iteration(cfg.problem, solve);
    } catch (const ConvergenceError& e) {
        mark_failed(out, e.what(), log);
        return 1;
    }
    log.note("converged: residual " + format_double(sol.values.residual) + " after " +
             std::to_string(sol.values.iterations) + " sweeps");

    write_table_csv(out / "table.csv", sol.values, sol.policy);
    const auto scan = scan_structure(cfg.problem, sol);

    std::string viol = std::string(kViolationHeader) + "\n";
    for (const auto& v : scan.violations) {
        viol += std::to_string(v.tau) + ",";
        for (int j = static_cast<int>(v.state.size()) - 1; j >= 0; --j)
            viol += std::to_string(v.state[j]) + (j > 0 ? ";" : "");
        viol += "," + v.clause + "," + std::to_string(v.delta_a) + "," +
                std::to_string(v.delta_b) + "\n";
    }
    write_text_file(out / "sensitivity_violations.csv", viol);

    std::string ncv = std::string(kWitnessHeader) + "\n";
    for (const auto& w : scan.qz_witnesses)
        ncv += "qz," + std::to_string(w.tau) + ",x1=" + std::to_string(w.x1) +
               ";x2=" + std::to_string(w.x2) + "," + std::to_string(w.index) + "," +
               format_double(w.second_difference) + "\n";
    for (const auto& w : scan.value_witnesses)
        ncv += "value," + std::to_string(w.tau) + "," + w.slice + "," +
               std::to_string(w.index) + ",\n";
    write_text_file(out / "nonconvexity_witnesses.csv", ncv);

    std::string summary = std::string(kExactSummaryHeader) + "\n";
    summary += cfg.name + "," + format_double(sol.values.v[0][0]) + "," +
               format_double(sol.values.residual) + "," + std::to_string(sol.values.iterations) +
               "," + std::to_string(scan.violations.size()) + "," +
               std::to_string(scan.qz_witnesses.size() + scan.value_witnesses.size()) + "\n";
    write_text_file(out / "summary.csv", summary);
    log.note("violations: " + std::to_string(scan.violations.size()) +
             ", nonconvexity witnesses (q over z): " + std::to_string(scan.qz_witnesses.size()));

    finish_run(out, "exact", cfg,
               {"table.csv", "sensitivity_violations.csv", "nonconvexity_witnesses.csv",
                "summary.csv"},
               log);
    return 0;
}

inline int cmd_adp(const ScenarioConfig& cfg, const fs::path& out, RunLog& log) {
    log.note("approximate policy iteration on '" + cfg.name + "' (choice " +
             std::to_string(cfg.adp.choice) + ", Q=" + std::to_string(cfg.adp.replications) +
             ", H=" + std::to_string(cfg.adp.horizon) +
             ", N=" + std::to_string(cfg.adp.iterations) + ")");
    const auto api = run_approximate_policy_iteration(cfg.problem, cfg.api_options());
    log.note("best iteration " + std::to_string(api.best_iteration) + " with estimate " +
             format_double(api.iterations[api.best_iteration].cost_estimate));

    // exact reference when the instance is small enough to solve
    std::optional<DpSolution> exact;
    std::optional<double> exact_best_value;  // exact value of the best greedy policy
    if (cfg.problem.m() <= 3) {
        const SolveOptions solve{cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()};
        exact = value_iteration(cfg.problem, solve);
        log.note("exact reference value " + format_double(exact->values.v[0][0]));
        GreedyEvaluator eval(cfg.problem, cfg.adp.exact_budget, cfg.adp.n_mc);
        PolicyTable greedy{exact->values.grid, {}};
        greedy.action.assign(cfg.problem.period(),
                             std::vector<int>(exact->values.grid.per_tau(), 0));
        parallel_for(exact->values.grid.per_tau() * cfg.problem.period(),
                     cfg.effective_workers(), [&](std::size_t flat) {
                         const int tau = static_cast<int>(flat / exact->values.grid.per_tau());
                         const std::size_t idx = flat % exact->values.grid.per_tau();
                         std::vector<int> x(cfg.problem.m() - 1);
                         exact->values.grid.decode(idx, x);
                         GreedyScratch scratch = eval.make_scratch();
                         Rng rng(0);
                         greedy.action[tau][idx] = greedy_action(
                             eval, GreedyMode::Exact, tau, x, api.best, rng, scratch);
                     });
        const auto pv = policy_value(cfg.problem, greedy,
                                     {cfg.solver.tol, cfg.solver.max_iters,
                                      cfg.effective_workers()});
        exact_best_value = pv.v[0][0];
        log.note("best-policy exact value " + format_double(*exact_best_value));
    }

    std::string iters = std::string(kAdpIterationsHeader) + "\n";
    for (const auto& rec : api.iterations) {
        iters += std::to_string(rec.iteration) + "," + format_double(rec.cost_estimate) + "," +
                 format_double(rec.ci_halfwidth) + ",";
        if (exact) {
            const auto gap = optimality_gap(rec.cost_estimate, rec.ci_halfwidth,
                                            exact->values.v[0][0], 0.0, ReferenceKind::Exact);
            iters += format_double(gap.gap_pct) + "," + format_double(gap.ci_halfwidth);
        } else {
            iters += ",";
        }
        iters += "," + format_double(rec.beta_l2) + "," + (rec.rank_deficient ? "1" : "0");
        iters += "\n";
    }
    write_text_file(out / "iterations.csv", iters);
    write_json_file(out / "approx.json", approx_to_json(api.best));

    std::string summary = std::string(kAdpSummaryHeader) + "\n";
    const auto& best = api.iterations[api.best_iteration];
    const auto& myo = api.iterations[0];
    summary += cfg.name + "," + std::to_string(api.best_iteration) + "," +
               format_double(best.cost_estimate) + "," + format_double(best.ci_halfwidth) + ",";
    if (exact) {
        const double vstar = exact->values.v[0][0];
        summary += format_double(vstar) + "," +
                   format_double(100.0 * (*exact_best_value - vstar) / vstar) + ",";
    } else {
        summary += ",,";
    }
    summary += format_double(myo.cost_estimate) + ",";
    if (exact) {
        const double vstar = exact->values.v[0][0];
        summary += format_double(100.0 * (myo.cost_estimate - vstar) / vstar);
    }
    summary += "\n";
    write_text_file(out / "summary.csv", summary);

    finish_run(out, "adp", cfg, {"iterations.csv", "approx.json", "summary.csv"}, log);
    return 0;
}

inline int cmd_myopic(const ScenarioConfig& cfg, const fs::path& out, RunLog& log) {
    std::string summary = std::string(kMyopicSummaryHeader) + "\n";
    if (cfg.problem.m() <= 3) {
        log.note("exact myopic policy and its exact discounted value");
        const SolveOptions solve{cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()};
        GreedyEvaluator eval(cfg.problem, cfg.adp.exact_budget, cfg.adp.n_mc);
        const StateGrid grid{cfg.problem.m(), cfg.problem.x_cap, cfg.problem.period()};
        PolicyTable myopic{grid, {}};
        myopic.action.assign(grid.period, std::vector<int>(grid.per_tau(), 0));
        auto zero = [](int, std::span<const int>) { return 0.0; };
        parallel_for(grid.per_tau() * grid.period, cfg.effective_workers(), [&](std::size_t f) {
            const int tau = static_cast<int>(f / grid.per_tau());
            const std::size_t idx = f % grid.per_tau();
            std::vector<int> x(grid.dim());
            grid.decode(idx, x);
            GreedyScratch scratch = eval.make_scratch();
            myopic.action[tau][idx] = eval.decide_exact(tau, x, zero, scratch);
        });
        const auto pv = policy_value(cfg.problem, myopic, solve);
        const auto sol = value_iteration(cfg.problem, solve);
        const double vstar = sol.values.v[0][0];
        const double vmyo = pv.v[0][0];
        write_table_csv(out / "myopic_policy.csv", pv, myopic);
        summary += cfg.name + ",myopic," + format_double(vmyo) + ",0," + format_double(vstar) +
                   "," + format_double(100.0 * (vmyo - vstar) / vstar) + "\n";
        log.note("myopic gap " + format_double(100.0 * (vmyo - vstar) / vstar) + "%");
    } else {
        log.note("simulated myopic evaluation");
        const auto report = evaluate_policy(
            cfg.problem, PolicyHandle::myopic(GreedyMode::Auto), InventoryState::zero(0, cfg.problem.m()),
            cfg.eval.horizon, cfg.eval.replications, cfg.seed, cfg.effective_workers(),
            cfg.adp.n_mc, cfg.adp.exact_budget);
        summary += cfg.name + ",myopic," + format_double(report.cost.mean) + "," +
                   format_double(report.cost.ci_halfwidth()) + ",,\n";
    }
    write_text_file(out / "summary.csv", summary);
    finish_run(out, "myopic", cfg, {"summary.csv"}, log);
    return 0;
}

inline int cmd_bound(const ScenarioConfig& cfg, const fs::path& out, RunLog& log) {
    log.note("information-relaxation lower bound with " +
             std::to_string(cfg.bound.replications) + " replications");
    LowerBoundResult lb;
    try {
        lb = lower_bound(cfg.problem, InventoryState::zero(0, cfg.problem.m()),
                         cfg.bound.replications, cfg.seed, cfg.effective_workers());
    } catch (const std::invalid_argument& e) {
        mark_failed(out, e.what(), log);
        return 1;
    }
    log.note("estimate " + format_double(lb.estimate) + " +- " +
             format_double(lb.ci_halfwidth));
    std::string summary = std::string(kBoundSummaryHeader) + "\n";
    summary += cfg.name + "," + format_double(lb.estimate) + "," +
               format_double(lb.ci_halfwidth) + "," + format_double(lb.standard_error) + "," +
               std::to_string(lb.replications) + ",";
    if (cfg.problem.m() <= 3) {
        const auto sol = value_iteration(
            cfg.problem, {cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()});
        const double vstar = sol.values.v[0][0];
        summary += format_double(vstar) + "," + format_double(100.0 * (vstar - lb.estimate) / vstar);
        log.note("exact optimum " + format_double(vstar));
    } else {
        summary += ",";
    }
    summary += "\n";
    write_text_file(out / "summary.csv", summary);
    finish_run(out, "bound", cfg, {"summary.csv"}, log);
    return 0;
}

struct EvaluateOptions {
    std::string policy = "myopic";  // myopic | exact | deter | table:PATH | approx:PATH
    std::string trace_path;
};

inline PolicyHandle resolve_policy(const ScenarioConfig& cfg, const std::string& spec,
                                   RunLog& log) {
    const SolveOptions solve{cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()};
    if (spec == "myopic") return PolicyHandle::myopic(GreedyMode::Auto);
    if (spec == "exact") {
        log.note("solving the exact policy for evaluation");
        return PolicyHandle::lookup(value_iteration(cfg.problem, solve).policy, "exact-optimal");
    }
    if (spec == "deter") {
        log.note("solving the deterministic-shelf-life policy for evaluation");
        return PolicyHandle::lookup(deterministic_shelf_life_policy(cfg.problem, solve).policy,
                                    "deterministic-shelf-life");
    }
    if (spec.rfind("table:", 0) == 0) {
        const StateGrid grid{cfg.problem.m(), cfg.problem.x_cap, cfg.problem.period()};
        return PolicyHandle::lookup(read_table_csv(spec.substr(6), grid).policy, "lookup-table");
    }
    if (spec.rfind("approx:", 0) == 0)
        return PolicyHandle::approximation(approx_from_json(read_json_file(spec.substr(7))),
                                           cfg.problem, GreedyMode::Auto, "adp");
    throw ConfigError("unknown policy spec '" + spec +
                      "' (use myopic | exact | deter | table:PATH | approx:PATH)");
}

inline int cmd_evaluate(const ScenarioConfig& cfg, const EvaluateOptions& eopt,
                        const fs::path& out, RunLog& log) {
    const auto policy = resolve_policy(cfg, eopt.policy, log);
    EvaluationReport report;
    if (eopt.trace_path.empty()) {
        log.note("evaluating '" + policy.label() + "' from the empty start state");
        report = evaluate_policy(cfg.problem, policy, InventoryState::zero(0, cfg.problem.m()),
                                 cfg.eval.horizon, cfg.eval.replications, cfg.seed,
                                 cfg.effective_workers(), cfg.adp.n_mc, cfg.adp.exact_budget);
    } else {
        const auto trace = read_demand_trace(eopt.trace_path);
        log.note("evaluating '" + policy.label() + "' on a " +
                 std::to_string(trace.demand.size()) + "-period demand trace");
        report = evaluate_on_demand_trace(cfg.problem, policy, trace.demand, trace.start_tau,
                                          cfg.eval.replications, cfg.seed,
                                          cfg.effective_workers(), cfg.adp.n_mc,
                                          cfg.adp.exact_budget);
    }
    write_text_file(out / "report.csv",
                    std::string(kReportHeader) + "\n" + report_csv_row(cfg.name, report) + "\n");
    write_json_file(out / "report.json", report_to_json(report));
    log.note("cost " + format_double(report.cost.mean) + " +- " +
             format_double(report.cost.ci_halfwidth()));
    finish_run(out, "evaluate", cfg, {"report.csv", "report.json"}, log);
    return 0;
}

// Impact of ignoring shelf-life uncertainty on one scenario cell: policies
// built under deterministic / refit-exogenous assumptions, evaluated under
// the true endogenous model. Exact route for m <= 3.
inline int cmd_impact(const ScenarioConfig& cfg, const fs::path& out, RunLog& log) {
    if (cfg.problem.m() > 3) {
        mark_failed(out, "impact command currently supports m <= 3 (exact route)", log);
        return 1;
    }
    const SolveOptions solve{cfg.solver.tol, cfg.solver.max_iters, cfg.effective_workers()};
    log.note("exact policies under true / deterministic / refit-exogenous assumptions");
    const auto cell = run_impact_cell(cfg, solve);

    std::string csv = std::string(kImpactHeader) + "\n";
    const auto add_row = [&](const std::string& label, double cost, bool fallback = false) {
        csv += cfg.name + "," + label + "," + format_double(cost) + ",0," +
               format_double(cell.gap_pct(cost)) + ",0\n";
        log.note(label + ": exact cost " + format_double(cost) + " (gap " +
                 format_double(cell.gap_pct(cost)) +
                 (fallback ? "%, no delivery data; data policy reused)" : "%)"));
    };
    add_row("exact-optimal", cell.v_star);
    add_row("myopic", cell.v_myopic);
    add_row("deterministic-shelf-life", cell.v_deter);
    add_row("exogenous-refit-optimal", cell.v_exo_opt, cell.exo_opt_fallback);
    add_row("exogenous-refit-myopic", cell.v_exo_myo, cell.exo_myo_fallback);

    write_text_file(out / "impact.csv", csv);
    finish_run(out, "impact", cfg, {"impact.csv"}, log);
    return 0;
}

struct TraceOptions {
    int days = 364;
    std::string file = "trace.csv";
};

inline int cmd_make_trace(const ScenarioConfig& cfg, const TraceOptions& topt,
                          const fs::path& out, RunLog& log) {
    DemandTrace trace;
    trace.start_tau = 0;
    Rng rng = make_stream(cfg.seed, StreamPurpose::Evaluation, 0xDEA1, 0);
    for (int t = 0; t < topt.days; ++t)
        trace.demand.push_back(cfg.problem.demand.sample(t % cfg.problem.period(),
                                                         rng.next_u01()));
    write_demand_trace(out / topt.file, trace);
    log.note("sampled a " + std::to_string(topt.days) + "-day demand trace");
    finish_run(out, "make-trace", cfg, {topt.file}, log);
    return 0;
}

inline int cmd_presets() {
    std::printf("%-22s %-10s %2s %6s %6s  %s\n", "name", "family", "m", "fixed", "waste",
                "slopes");
    for (const auto& p : preset_catalog()) {
        std::string slopes;
        for (double s : p.config.problem.shelf.slopes())
            slopes += (slopes.empty() ? "" : ",") + format_double(s);
        std::printf("%-22s %-10s %2d %6g %6g  (%s)\n", p.name.c_str(), p.family.c_str(),
                    p.config.problem.m(), p.config.problem.costs.fixed,
                    p.config.problem.costs.wastage, slopes.c_str());
    }
    return 0;
}

inline int run(std::vector<std::string> args) {
    CLI::App app{"perishable-inventory ordering policies: exact DP, simulation-based "
                 "approximate policy iteration, bounds and benchmarks"};
    app.require_subcommand(1);

    CommonOptions opt;
    EvaluateOptions eopt;
    TraceOptions topt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--preset", opt.preset, "named scenario preset");
        sub->add_option("--config", opt.config_path,
                        "configuration file (or a manifest.json to rerun)");
        sub->add_option("--out", opt.out_dir, "output directory")->envname("PADP_OUT");
        sub->add_option("--seed", opt.seed, "master seed")->envname("PADP_SEED");
        sub->add_option("--workers", opt.workers, "worker threads (0 = all)")
            ->envname("PADP_WORKERS");
        sub->add_option("--scale", opt.scale, "replication budgets: paper | desk | smoke")
            ->envname("PADP_SCALE");
        sub->add_option("--iters", opt.iters, "policy-iteration count override");
        sub->add_option("--reps", opt.reps, "training replication override");
        sub->add_option("--horizon", opt.horizon, "horizon override");
        sub->add_option("--choice", opt.choice, "basis choice override (1-4)");
    };

    auto* exact = app.add_subcommand("exact", "exact value iteration + structure witnesses");
    add_common(exact);
    auto* adp = app.add_subcommand("adp", "simulation-based approximate policy iteration");
    add_common(adp);
    auto* myopic = app.add_subcommand("myopic", "myopic benchmark policy");
    add_common(myopic);
    auto* bound = app.add_subcommand("bound", "information-relaxation lower bound");
    add_common(bound);
    auto* impact = app.add_subcommand("impact", "cost of ignoring shelf-life uncertainty");
    add_common(impact);
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a policy on a scenario or trace");
    add_common(evaluate);
    evaluate->add_option("--policy", eopt.policy,
                         "myopic | exact | deter | table:PATH | approx:PATH");
    evaluate->add_option("--trace", eopt.trace_path, "demand trace csv");
    auto* mktrace = app.add_subcommand("make-trace", "sample a synthetic demand trace");
    add_common(mktrace);
    mktrace->add_option("--days", topt.days, "trace length in days");
    mktrace->add_option("--file", topt.file, "output file name");
    auto* presets = app.add_subcommand("presets", "list the scenario catalog");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (presets->parsed()) return cmd_presets();

    try {
        const ScenarioConfig cfg = resolve_config(opt);
        const fs::path out = opt.out_dir;
        fs::create_directories(out);
        std::error_code ec;
        fs::remove(out / "FAILED", ec);
        RunLog log;
        log.note(std::string(version_string()) + " | scenario '" + cfg.name + "' | seed " +
                 std::to_string(cfg.seed) + " | scale " + cfg.scale);
        if (exact->parsed()) return cmd_exact(cfg, out, log);
        if (adp->parsed()) return cmd_adp(cfg, out, log);
        if (myopic->parsed()) return cmd_myopic(cfg, out, log);
        if (bound->parsed()) return cmd_bound(cfg, out, log);
        if (impact->parsed()) return cmd_impact(cfg, out, log);
        if (evaluate->parsed()) return cmd_evaluate(cfg, eopt, out, log);
        if (mktrace->parsed()) return cmd_make_trace(cfg, topt, out, log);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace padp::cli
