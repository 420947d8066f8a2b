#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "padp/demand.hpp"
#include "padp/shelflife.hpp"

namespace padp {

// Cost structure of the ordering problem. `discount` is the per-period factor
// applied to future costs.
struct CostParams {
    double fixed = 0.0;     // charged once per period with a nonzero order
    double holding = 0.0;   // per unit left over at the end of the period
    double shortage = 0.0;  // per unit of unmet demand
    double wastage = 0.0;   // per expired unit
    double discount = 0.95;

    void validate() const {
        if (fixed < 0 || holding < 0 || shortage < 0 || wastage < 0)
            throw std::invalid_argument("costs must be nonnegative");
        if (!(discount >= 0.0) || !(discount < 1.0))
            throw std::invalid_argument("discount must be in [0,1)");
    }
};

// MDP state: time index within the demand period plus the age-stratified
// inventory. onhand[i] = units with remaining shelf-life i+1, for i in
// {0..m-2}; units reaching remaining life 0 have already expired.
struct InventoryState {
    int tau = 0;
    std::vector<int> onhand;

    InventoryState() = default;
    InventoryState(int tau_, std::vector<int> onhand_) : tau(tau_), onhand(std::move(onhand_)) {}
    static InventoryState zero(int tau, int m) {
        return InventoryState(tau, std::vector<int>(m - 1, 0));
    }

    int total() const { return std::accumulate(onhand.begin(), onhand.end(), 0); }
    bool operator==(const InventoryState&) const = default;
};

struct StageCost {
    double total = 0.0;
    double fixed = 0.0;
    double holding = 0.0;
    double shortage = 0.0;
    double wastage = 0.0;
};

// Per-period bookkeeping used by the evaluation metrics.
struct PeriodOutcome {
    StageCost cost;
    int served = 0;    // demand satisfied from stock plus delivery
    int unmet = 0;     // lost demand
    int expired = 0;   // units that reached remaining life 0 unserved
    int clamped = 0;   // units discarded by the per-age state truncation
};

inline int positive_part(int a) { return a > 0 ? a : 0; }

// One period of OUFO dynamics on raw arrays; the hot path shared by all
// solvers. `onhand` has m-1 entries (oldest first), `delivery` has m entries.
// Demand is served oldest-first from on-hand stock plus the delivery, age-1
// leftovers expire, everything else ages down one slot. Each next-state entry
// is clamped to x_cap. Returns the number of units discarded by clamping.
inline int transition_raw(std::span<const int> onhand, std::span<const int> delivery, int demand,
                          int x_cap, std::span<int> next_onhand) {
    const int m = static_cast<int>(delivery.size());
    int clamped = 0;
    int cum = onhand.empty() ? delivery[0] : onhand[0] + delivery[0];  // ages <= j so far
    for (int j = 1; j <= m - 1; ++j) {
        const int spill = positive_part(demand - cum);
        const int pool = (j < m - 1 ? onhand[j] : 0) + delivery[j];  // units of age j+1
        const int leftover = positive_part(pool - spill);
        const int kept = std::min(leftover, x_cap);
        clamped += leftover - kept;
        next_onhand[j - 1] = kept;
        cum += pool;
    }
    return clamped;
}

inline InventoryState transition(const InventoryState& state, int order_size,
                                 const DeliveryVector& delivery, int demand, int period_len,
                                 int x_cap, PeriodOutcome* outcome = nullptr) {
    const int m = static_cast<int>(delivery.count.size());
    if (static_cast<int>(state.onhand.size()) != m - 1)
        throw std::invalid_argument("transition: state/delivery age mismatch");
    if (delivery.total() != order_size)
        throw std::invalid_argument("transition: delivery does not match order size");
    if (demand < 0) throw std::invalid_argument("transition: negative demand");

    InventoryState next;
    next.tau = (state.tau + 1) % period_len;
    next.onhand.assign(m - 1, 0);
    const int clamped = transition_raw(state.onhand, delivery.count, demand, x_cap, next.onhand);

    if (outcome) {
        const int supply = state.total() + order_size;
        const int oldest = (m >= 2 ? state.onhand[0] : 0) + delivery.count[0];
        outcome->served = std::min(demand, supply);
        outcome->unmet = positive_part(demand - supply);
        outcome->expired = positive_part(oldest - demand);
        outcome->clamped = clamped;
    }
    return next;
}

// Literal evaluation of the four-part period cost:
//   fixed * 1{z>0} + holding * (total + z - d)^+ + shortage * (d - total - z)^+
//   + wastage * (x_1 + y_1 - d)^+.
// Units that expire are deliberately also charged holding for the period;
// the holding term applies to all leftovers.
inline StageCost stage_cost(const InventoryState& state, int order_size,
                            const DeliveryVector& delivery, int demand, const CostParams& costs) {
    const int m = static_cast<int>(delivery.count.size());
    StageCost c;
    c.fixed = order_size > 0 ? costs.fixed : 0.0;
    const int supply = state.total() + order_size;
    c.holding = costs.holding * positive_part(supply - demand);
    c.shortage = costs.shortage * positive_part(demand - supply);
    const int oldest = (m >= 2 ? state.onhand[0] : 0) + delivery.count[0];
    c.wastage = costs.wastage * positive_part(oldest - demand);
    c.total = c.fixed + c.holding + c.shortage + c.wastage;
    return c;
}

// Raw-array flavor for solver loops.
inline double stage_cost_raw(int total_onhand, int oldest_onhand, int order_size, int delivery_old,
                             int demand, const CostParams& costs) {
    double c = order_size > 0 ? costs.fixed : 0.0;
    const int supply = total_onhand + order_size;
    c += costs.holding * positive_part(supply - demand);
    c += costs.shortage * positive_part(demand - supply);
    c += costs.wastage * positive_part(oldest_onhand + delivery_old - demand);
    return c;
}

// The model primitives every solver consumes: demand, shelf-life, costs,
// maximum order size and the per-age inventory truncation.
struct Problem {
    PeriodicDemandModel demand;
    ShelfLifeModel shelf;
    CostParams costs;
    int max_order = 20;  // order sizes are {0..max_order}
    int x_cap = 20;      // per-age on-hand truncation

    int m() const { return shelf.max_shelf_life(); }
    int period() const { return demand.period(); }

    void validate() const {
        costs.validate();
        if (m() < 2) throw std::invalid_argument("max shelf-life must be >= 2");
        if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
        if (x_cap < 1) throw std::invalid_argument("x_cap must be >= 1");
    }

    // An upper bound on any single-period cost; divided by (1 - discount) it
    // bounds the value function.
    double stage_cost_bound() const {
        const int carried = (m() - 1) * x_cap;
        return costs.fixed + costs.holding * (carried + max_order) +
               costs.shortage * demand.truncation() +
               costs.wastage * (x_cap + max_order);
    }
};

// Exact one-step expectation of stage cost plus discounted continuation:
// every delivery composition of `order_size` into m categories is enumerated
// (weighted by the multinomial pmf) together with every demand value. Returns
// nullopt when the composition count exceeds `max_compositions`, signalling
// the caller to fall back to Monte-Carlo estimation.
template <typename ValueFn>
std::optional<double> expectation_over_outcomes(const InventoryState& state, int order_size,
                                                const Problem& problem, ValueFn&& continuation,
                                                std::size_t max_compositions = 100000) {
    const int m = problem.m();
    if (composition_count(order_size, m) > max_compositions) return std::nullopt;
    const auto pmf = problem.demand.pmf_row(state.tau);
    const int next_tau = (state.tau + 1) % problem.period();

    double expected = 0.0;
    std::vector<int> next(m - 1, 0);
    for_each_composition(order_size, m, [&](const DeliveryVector& y) {
        const double wy = problem.shelf.delivery_pmf(order_size, y);
        if (wy == 0.0) return;
        double inner = 0.0;
        for (int d = 0; d <= problem.demand.truncation(); ++d) {
            const double wd = pmf[d];
            if (wd == 0.0) continue;
            const StageCost c = stage_cost(state, order_size, y, d, problem.costs);
            transition_raw(state.onhand, y.count, d, problem.x_cap, next);
            inner += wd * (c.total + problem.costs.discount *
                                         continuation(next_tau, std::span<const int>(next)));
        }
        expected += wy * inner;
    });
    return expected;
}

}  // namespace padp
