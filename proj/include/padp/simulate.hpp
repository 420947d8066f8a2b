#pragma once

#include <span>
#include <vector>

#include "padp/mdp.hpp"
#include "padp/rng.hpp"

namespace padp {

// Immutable per-problem sampling caches shared by every simulation loop:
// category probabilities and freshest-first cumulative thresholds for each
// order size. All sampling consumes caller-supplied uniforms.
class Simulator {
  public:
    explicit Simulator(const Problem& problem)
        : m_(problem.m()),
          max_order_(problem.max_order),
          block_size_(problem.max_order + 1) {
        probs_.resize(max_order_ + 1);
        cum_desc_.resize(max_order_ + 1);
        for (int z = 0; z <= max_order_; ++z) {
            probs_[z] = problem.shelf.probabilities(z);
            auto& cum = cum_desc_[z];
            cum.resize(m_);
            double acc = 0.0;
            for (int i = 0; i < m_; ++i) {
                acc += probs_[z][m_ - 1 - i];
                cum[i] = acc;
            }
            cum[m_ - 1] = 1.0;
        }
    }

    int max_shelf_life() const { return m_; }
    int max_order() const { return max_order_; }
    // one delivery block (max_order uniforms) plus one demand uniform
    int block_size() const { return block_size_; }
    std::span<const double> probabilities(int z) const { return probs_[z]; }

    // Categorize the first z uniforms of a block, freshest category first.
    void sample_delivery_counts(int z, std::span<const double> uniforms,
                                std::span<int> counts) const {
        for (int k = 0; k < m_; ++k) counts[k] = 0;
        const auto& cum = cum_desc_[z];
        for (int unit = 0; unit < z; ++unit) {
            const double u = uniforms[unit];
            int i = 0;
            while (cum[i] <= u) ++i;
            ++counts[m_ - 1 - i];
        }
    }

  private:
    int m_, max_order_, block_size_;
    std::vector<std::vector<double>> probs_;
    std::vector<std::vector<double>> cum_desc_;
};

// One simulated period under caller-chosen order size. The outcome block
// must hold `sim.block_size()` uniforms: max_order delivery uniforms followed
// by one demand uniform. Blocks are drawn eagerly once per period regardless
// of the chosen order size, which keeps demand realizations identical across
// policies compared under the same stream (the pairing contract).
struct PeriodRecord {
    int tau = 0;
    int order = 0;
    int demand = 0;
    PeriodOutcome outcome;
    int post_delivery_stock = 0;        // on-hand plus delivery, before demand
    std::span<const int> delivery = {};  // per-category counts; valid during the hook only
};

template <typename DecideFn, typename OnPeriod>
InventoryState simulate_trajectory(const Problem& problem, const Simulator& sim,
                                   InventoryState state, int periods, Rng& outcome_rng,
                                   DecideFn&& decide, OnPeriod&& on_period,
                                   std::span<const int> forced_demand = {}) {
    const int m = problem.m();
    std::vector<double> block(sim.block_size());
    std::vector<int> delivery(m);
    std::vector<int> next(m - 1);
    for (int t = 0; t < periods; ++t) {
        outcome_rng.fill_u01(block);
        const int z = decide(state.tau, std::span<const int>(state.onhand));
        sim.sample_delivery_counts(z, block, delivery);
        // the demand uniform is consumed even when demand is replayed from a
        // trace, so block alignment never depends on the evaluation mode
        const int d = forced_demand.empty()
                          ? problem.demand.sample(
                                state.tau, block[static_cast<std::size_t>(sim.max_order())])
                          : std::min(forced_demand[t], problem.demand.truncation());

        PeriodRecord rec;
        rec.tau = state.tau;
        rec.order = z;
        rec.demand = d;
        rec.post_delivery_stock = state.total() + z;
        rec.delivery = delivery;

        const int supply = rec.post_delivery_stock;
        rec.outcome.served = std::min(d, supply);
        rec.outcome.unmet = positive_part(d - supply);
        rec.outcome.expired = positive_part(state.onhand[0] + delivery[0] - d);
        rec.outcome.clamped = transition_raw(state.onhand, delivery, d, problem.x_cap, next);
        rec.outcome.cost.fixed = z > 0 ? problem.costs.fixed : 0.0;
        rec.outcome.cost.holding = problem.costs.holding * positive_part(supply - d);
        rec.outcome.cost.shortage = problem.costs.shortage * rec.outcome.unmet;
        rec.outcome.cost.wastage = problem.costs.wastage * rec.outcome.expired;
        rec.outcome.cost.total = rec.outcome.cost.fixed + rec.outcome.cost.holding +
                                 rec.outcome.cost.shortage + rec.outcome.cost.wastage;

        on_period(t, state, rec);
        state.onhand.assign(next.begin(), next.end());
        state.tau = (state.tau + 1) % problem.period();
    }
    return state;
}

}  // namespace padp
