#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "padp/adp.hpp"
#include "padp/structure.hpp"

namespace padp {

// A policy in any of the forms the experiments compare: a solved lookup
// table, a greedy rule over a fitted approximation, the myopic rule (zero
// continuation), or a constant order (test stub). Resolves every state of
// the truncated grid to an order size.
class PolicyHandle {
  public:
    static PolicyHandle lookup(PolicyTable table, std::string label = "lookup-table") {
        return PolicyHandle(std::move(label), Lookup{std::move(table)});
    }
    // The approximation is tabulated over the problem's grid up front so each
    // greedy decision probes the continuation at lookup cost.
    static PolicyHandle approximation(ValueApprox approx, const Problem& problem,
                                      GreedyMode mode = GreedyMode::Auto,
                                      std::string label = "adp") {
        const StateGrid grid{problem.m(), problem.x_cap, problem.period()};
        std::shared_ptr<const CachedApprox> cache;
        if (CachedApprox::fits(grid))
            cache = std::make_shared<const CachedApprox>(approx, grid);
        return PolicyHandle(std::move(label), Approx{std::move(approx), mode, std::move(cache)});
    }
    static PolicyHandle myopic(GreedyMode mode = GreedyMode::Auto) {
        return PolicyHandle("myopic", Myopic{mode});
    }
    static PolicyHandle constant(int order) { return PolicyHandle("constant", Constant{order}); }

    const std::string& label() const { return label_; }

    int decide(const GreedyEvaluator& eval, int tau, std::span<const int> x, Rng& policy_rng,
               GreedyScratch& scratch) const {
        if (const auto* p = std::get_if<Lookup>(&impl_)) return p->table.at(tau, x);
        if (const auto* p = std::get_if<Approx>(&impl_)) {
            if (p->cache)
                return greedy_action(eval, p->mode, tau, x, *p->cache, policy_rng, scratch);
            return greedy_action(eval, p->mode, tau, x, p->approx, policy_rng, scratch);
        }
        if (const auto* p = std::get_if<Myopic>(&impl_)) {
            auto zero = [](int, std::span<const int>) { return 0.0; };
            return eval.decide(p->mode, tau, x, zero, policy_rng, scratch);
        }
        return std::get<Constant>(impl_).order;
    }

  private:
    struct Lookup {
        PolicyTable table;
    };
    struct Approx {
        ValueApprox approx;
        GreedyMode mode;
        std::shared_ptr<const CachedApprox> cache;
    };
    struct Myopic {
        GreedyMode mode;
    };
    struct Constant {
        int order;
    };
    using Impl = std::variant<Lookup, Approx, Myopic, Constant>;

    PolicyHandle(std::string label, Impl impl) : label_(std::move(label)), impl_(std::move(impl)) {}

    std::string label_;
    Impl impl_;
};

// Exact policy for the modification that pretends every delivered unit
// arrives fresh (p_m = 1). The returned tables are meant to be evaluated
// under the true shelf-life model.
inline DpSolution deterministic_shelf_life_policy(const Problem& problem,
                                                  const SolveOptions& opts = {}) {
    Problem modified = problem;
    modified.shelf = ShelfLifeModel::deterministic_fresh(problem.m());
    return value_iteration(modified, opts);
}

// Myopic decisions tabulated over the whole grid (exact expectation mode).
inline PolicyTable myopic_policy_table(const Problem& problem, const GreedyEvaluator& eval,
                                       int workers = 1) {
    const StateGrid grid{problem.m(), problem.x_cap, problem.period()};
    PolicyTable table{grid, {}};
    table.action.assign(grid.period, std::vector<int>(grid.per_tau(), 0));
    auto zero = [](int, std::span<const int>) { return 0.0; };
    parallel_for(grid.per_tau() * grid.period, workers, [&](std::size_t flat) {
        const int tau = static_cast<int>(flat / grid.per_tau());
        const std::size_t idx = flat % grid.per_tau();
        std::vector<int> x(grid.dim());
        grid.decode(idx, x);
        GreedyScratch scratch = eval.make_scratch();
        table.action[tau][idx] = eval.decide_exact(tau, x, zero, scratch);
    });
    return table;
}

// Greedy decisions for a fitted approximation tabulated over the whole grid.
inline PolicyTable approximation_policy_table(const Problem& problem, const GreedyEvaluator& eval,
                                              const ValueApprox& approx, int workers = 1) {
    const StateGrid grid{problem.m(), problem.x_cap, problem.period()};
    const CachedApprox cached(approx, grid);
    PolicyTable table{grid, {}};
    table.action.assign(grid.period, std::vector<int>(grid.per_tau(), 0));
    parallel_for(grid.per_tau() * grid.period, workers, [&](std::size_t flat) {
        const int tau = static_cast<int>(flat / grid.per_tau());
        const std::size_t idx = flat % grid.per_tau();
        std::vector<int> x(grid.dim());
        grid.decode(idx, x);
        GreedyScratch scratch = eval.make_scratch();
        Rng rng(0);
        table.action[tau][idx] =
            greedy_action(eval, GreedyMode::Exact, tau, x, cached, rng, scratch);
    });
    return table;
}

struct RefitResult {
    ShelfLifeModel model;                        // intercept-only (exogenous)
    std::vector<double> category_probabilities;  // empirical fractions
    long delivered_units = 0;
    bool smoothed = false;  // additive 0.5 smoothing was applied
};

// Simulate deliveries under `data_policy` and the true endogenous model, then
// fit an intercept-only Multinomial logit. With no order-size terms the
// maximum-likelihood fit is the empirical category frequencies, so the
// intercepts are log(p_k / p_1) in closed form. Periods are split into
// independent replications of `horizon` periods.
inline RefitResult exogenous_refit(const Problem& problem, const PolicyHandle& data_policy,
                                   int n_periods, int horizon, std::uint64_t seed, int workers,
                                   int n_mc = 1000, int exact_budget = 512) {
    if (n_periods < 1 || horizon < 1)
        throw std::invalid_argument("exogenous_refit: need positive period counts");
    const int m = problem.m();
    GreedyEvaluator eval(problem, exact_budget, n_mc);
    const int reps = (n_periods + horizon - 1) / horizon;

    std::vector<std::vector<long>> counts(reps, std::vector<long>(m, 0));
    parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t rep) {
        Rng outcome = make_stream(seed, StreamPurpose::Refit, rep);
        Rng policy = make_stream(seed, StreamPurpose::Refit, rep ^ 0x5bd1e995ULL);
        GreedyScratch scratch = eval.make_scratch();
        const int periods = std::min(horizon, n_periods - static_cast<int>(rep) * horizon);
        simulate_trajectory(
            problem, eval.simulator(), InventoryState::zero(0, m), periods, outcome,
            [&](int tau, std::span<const int> x) {
                return data_policy.decide(eval, tau, x, policy, scratch);
            },
            [&](int, const InventoryState&, const PeriodRecord& rec) {
                for (int k = 0; k < m; ++k) counts[rep][k] += rec.delivery[k];
            });
    });

    RefitResult out{ShelfLifeModel(), {}, 0, false};
    std::vector<double> total(m, 0.0);
    long units = 0;
    for (const auto& c : counts)
        for (int k = 0; k < m; ++k) {
            total[k] += static_cast<double>(c[k]);
            units += c[k];
        }
    if (units == 0) throw std::runtime_error("exogenous_refit: no delivery data");
    bool any_zero = false;
    for (double v : total) any_zero = any_zero || v == 0.0;
    if (any_zero) {
        for (double& v : total) v += 0.5;
        out.smoothed = true;
    }
    double sum = 0.0;
    for (double v : total) sum += v;
    out.category_probabilities.resize(m);
    for (int k = 0; k < m; ++k) out.category_probabilities[k] = total[k] / sum;
    out.model = ShelfLifeModel::from_probabilities(out.category_probabilities);
    out.delivered_units = units;
    return out;
}

}  // namespace padp
