#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "padp/baselines.hpp"
#include "padp/io.hpp"
#include "padp/stats.hpp"

namespace padp {

// Out-of-sample performance of one policy. Cost is the discounted sum of
// stage costs; rates are averaged across replications with normal CIs.
//   shortage_rate: 100 * unmet demand units / total demand units
//   expiry_rate:   100 * expired units / delivered units
//   avg_holding:   mean end-of-period on-hand inventory (all leftovers)
struct EvaluationReport {
    std::string policy;
    SampleStats cost;
    SampleStats order_frequency;  // fraction of periods with a nonzero order
    SampleStats total_orders;     // units ordered over the horizon
    SampleStats total_demand;     // demand units over the horizon
    SampleStats avg_holding;
    SampleStats shortage_rate;
    SampleStats expiry_rate;
    std::vector<double> weekday_post_delivery;  // mean on-hand + order, per time index
    std::vector<double> rep_costs;              // per-replication discounted costs (paired tests)
    std::vector<double> rep_expiry;             // per-replication expiry rates
    long clamp_events = 0;
    long clamped_demand_values = 0;  // trace values above the truncation level
    bool conservation_ok = true;     // delivered + initial == served + expired + carried + clamped
    int replications = 0;
    int horizon = 0;
};

enum class ReferenceKind { Exact, LowerBound };

inline GapEstimate optimality_gap(double cost, double cost_ci, double reference,
                                  double reference_ci, ReferenceKind kind) {
    return relative_gap(cost, cost_ci, reference,
                        kind == ReferenceKind::Exact ? 0.0 : reference_ci);
}

namespace detail {

struct RepMetrics {
    double cost = 0.0;
    double order_frequency = 0.0;
    double total_orders = 0.0;
    double total_demand = 0.0;
    double avg_holding = 0.0;
    double shortage_rate = 0.0;
    double expiry_rate = 0.0;
    std::vector<double> weekday_sum;
    std::vector<long> weekday_count;
    long clamped = 0;
    bool conserved = true;
};

// Fixed evaluation tags so streams never depend on the policy being measured:
// two policies evaluated with the same seed consume identical outcome blocks.
constexpr std::uint64_t kEvalTag = 0xE7A1;
constexpr std::uint64_t kTraceTag = 0xE7A2;

template <typename DemandProvider>
RepMetrics run_evaluation_rep(const Problem& problem, const GreedyEvaluator& eval,
                              const PolicyHandle& policy, const InventoryState& start,
                              int horizon, std::uint64_t seed, std::uint64_t tag,
                              std::size_t rep, DemandProvider&& forced) {
    RepMetrics metric;
    metric.weekday_sum.assign(problem.period(), 0.0);
    metric.weekday_count.assign(problem.period(), 0);

    Rng outcome = make_stream(seed, StreamPurpose::Evaluation, tag, rep);
    Rng policy_rng = make_stream(seed, StreamPurpose::PolicySampling, tag, rep);
    GreedyScratch scratch = eval.make_scratch();

    double disc = 1.0;
    long orders = 0, order_periods = 0, served = 0, expired = 0, unmet = 0, demand_total = 0;
    double holding_sum = 0.0;
    const InventoryState final_state = simulate_trajectory(
        problem, eval.simulator(), start, horizon, outcome,
        [&](int tau, std::span<const int> x) {
            return policy.decide(eval, tau, x, policy_rng, scratch);
        },
        [&](int, const InventoryState&, const PeriodRecord& rec) {
            metric.cost += disc * rec.outcome.cost.total;
            disc *= problem.costs.discount;
            orders += rec.order;
            order_periods += rec.order > 0 ? 1 : 0;
            served += rec.outcome.served;
            expired += rec.outcome.expired;
            unmet += rec.outcome.unmet;
            demand_total += rec.demand;
            holding_sum += positive_part(rec.post_delivery_stock - rec.demand);
            metric.clamped += rec.outcome.clamped;
            metric.weekday_sum[rec.tau] += rec.post_delivery_stock;
            ++metric.weekday_count[rec.tau];
        },
        forced());

    metric.order_frequency = static_cast<double>(order_periods) / horizon;
    metric.total_orders = static_cast<double>(orders);
    metric.total_demand = static_cast<double>(demand_total);
    metric.avg_holding = holding_sum / horizon;
    metric.shortage_rate = demand_total > 0 ? 100.0 * unmet / demand_total : 0.0;
    metric.expiry_rate = orders > 0 ? 100.0 * expired / orders : 0.0;
    metric.conserved =
        start.total() + orders == served + expired + final_state.total() + metric.clamped;
    return metric;
}

inline EvaluationReport summarize_reps(const Problem& problem, const PolicyHandle& policy,
                                       std::vector<RepMetrics> reps, int horizon) {
    EvaluationReport report;
    report.policy = policy.label();
    report.replications = static_cast<int>(reps.size());
    report.horizon = horizon;
    const auto collect = [&](auto member) {
        std::vector<double> vals;
        vals.reserve(reps.size());
        for (const auto& r : reps) vals.push_back(r.*member);
        return summarize(vals);
    };
    report.cost = collect(&RepMetrics::cost);
    report.rep_costs.reserve(reps.size());
    report.rep_expiry.reserve(reps.size());
    for (const auto& r : reps) {
        report.rep_costs.push_back(r.cost);
        report.rep_expiry.push_back(r.expiry_rate);
    }
    report.order_frequency = collect(&RepMetrics::order_frequency);
    report.total_orders = collect(&RepMetrics::total_orders);
    report.total_demand = collect(&RepMetrics::total_demand);
    report.avg_holding = collect(&RepMetrics::avg_holding);
    report.shortage_rate = collect(&RepMetrics::shortage_rate);
    report.expiry_rate = collect(&RepMetrics::expiry_rate);
    report.weekday_post_delivery.assign(problem.period(), 0.0);
    std::vector<double> counts(problem.period(), 0.0);
    for (const auto& r : reps) {
        for (int tau = 0; tau < problem.period(); ++tau) {
            report.weekday_post_delivery[tau] += r.weekday_sum[tau];
            counts[tau] += static_cast<double>(r.weekday_count[tau]);
        }
        report.clamp_events += r.clamped;
        report.conservation_ok = report.conservation_ok && r.conserved;
    }
    for (int tau = 0; tau < problem.period(); ++tau)
        if (counts[tau] > 0) report.weekday_post_delivery[tau] /= counts[tau];
    return report;
}

}  // namespace detail

// Monte-Carlo policy evaluation from a fixed start state under the true
// shelf-life model. Outcome streams are keyed by (seed, replication) only, so
// evaluations of different policies under one seed are paired replications
// with identical demand realizations.
inline EvaluationReport evaluate_policy(const Problem& problem, const PolicyHandle& policy,
                                        const InventoryState& start, int horizon,
                                        int replications, std::uint64_t seed, int workers = 1,
                                        int n_mc = 1000, int exact_budget = 512) {
    if (horizon < 1 || replications < 2)
        throw std::invalid_argument("evaluate_policy: need horizon >= 1 and replications >= 2");
    GreedyEvaluator eval(problem, exact_budget, n_mc);
    std::vector<detail::RepMetrics> reps(replications);
    parallel_for(static_cast<std::size_t>(replications), workers, [&](std::size_t rep) {
        reps[rep] = detail::run_evaluation_rep(problem, eval, policy, start, horizon, seed,
                                               detail::kEvalTag, rep,
                                               [] { return std::span<const int>{}; });
    });
    return detail::summarize_reps(problem, policy, std::move(reps), horizon);
}

// Demand replayed from a trace while shelf-life outcomes are re-simulated
// `replications` times. Values above the truncation level are clamped and
// counted in the report.
inline EvaluationReport evaluate_on_demand_trace(const Problem& problem,
                                                 const PolicyHandle& policy,
                                                 std::span<const int> trace, int start_tau,
                                                 int replications, std::uint64_t seed,
                                                 int workers = 1, int n_mc = 1000,
                                                 int exact_budget = 512) {
    if (trace.empty()) throw std::invalid_argument("demand trace is empty");
    long clamped_values = 0;
    for (int v : trace) {
        if (v < 0) throw std::domain_error("demand trace contains negative values");
        if (v > problem.demand.truncation()) ++clamped_values;
    }
    GreedyEvaluator eval(problem, exact_budget, n_mc);
    const InventoryState start = InventoryState::zero(start_tau, problem.m());
    const int horizon = static_cast<int>(trace.size());
    std::vector<detail::RepMetrics> reps(replications);
    parallel_for(static_cast<std::size_t>(replications), workers, [&](std::size_t rep) {
        reps[rep] = detail::run_evaluation_rep(problem, eval, policy, start, horizon, seed,
                                               detail::kTraceTag, rep, [&] { return trace; });
    });
    auto report = detail::summarize_reps(problem, policy, std::move(reps), horizon);
    report.clamped_demand_values = clamped_values;
    return report;
}

// ---- demand trace files -----------------------------------------------------
// One-column CSV; the header names the starting weekday: "demand[start_tau=K]".

struct DemandTrace {
    std::vector<int> demand;
    int start_tau = 0;
};

inline void write_demand_trace(const std::filesystem::path& path, const DemandTrace& trace) {
    std::string out = "demand[start_tau=" + std::to_string(trace.start_tau) + "]\n";
    for (int v : trace.demand) out += std::to_string(v) + "\n";
    write_text_file(path, out);
}

inline DemandTrace read_demand_trace(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty demand trace " + path.string());
    DemandTrace trace;
    const std::string& header = lines[0];
    const auto open = header.find("start_tau=");
    if (open == std::string::npos)
        throw std::runtime_error("demand trace header must declare start_tau: " + header);
    const auto close = header.find(']', open);
    trace.start_tau =
        static_cast<int>(parse_long(header.substr(open + 10, close - open - 10)));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        trace.demand.push_back(static_cast<int>(parse_long(lines[i])));
    }
    return trace;
}

}  // namespace padp
