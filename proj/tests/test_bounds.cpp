#include <doctest.h>

#include <cmath>
#include <vector>

#include "padp/bounds.hpp"
#include "padp/exact_dp.hpp"

using namespace padp;

namespace {
Problem tiny(double alpha = 0.9) {
    Problem p;
    p.demand = PeriodicDemandModel::negative_binomial({2.0, 3.0}, {1.5, 2.5}, 8);
    p.shelf = ShelfLifeModel(3, {1.0, 0.5}, {0.1, 0.2});
    p.costs = {5.0, 1.0, 10.0, 4.0, alpha};
    p.max_order = 8;
    p.x_cap = 8;
    return p;
}
}  // namespace

TEST_CASE("geometric horizon sampling") {
    CHECK(sample_horizon(0.95, 0.0) == 0);
    CHECK(sample_horizon(0.0, 0.7) == 0);
    CHECK(sample_horizon(0.95, 0.5) == 13);  // ln(0.5)/ln(0.95) = 13.51
    CHECK_THROWS_AS(sample_horizon(1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(sample_horizon(0.95, 1.0), std::domain_error);

    // empirical mean over 1e6 draws matches alpha/(1-alpha) = 19 within 3 sigma
    Rng rng(8);
    const int n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = sample_horizon(0.95, rng.next_u01());
        sum += t;
        sumsq += t * t;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - 19.0) <= 3.0 * se);
}

TEST_CASE("undiscounted geometric-horizon cost equals the discounted value") {
    // uncontrolled 2-state chain with known discounted value
    const double alpha = 0.9;
    const double c[2] = {2.0, 5.0};
    const double stay = 0.6;
    const double a11 = 1.0 - alpha * stay, a12 = -alpha * (1.0 - stay);
    const double det = a11 * a11 - a12 * a12;
    const double v0 = (a11 * c[0] - a12 * c[1]) / det;

    Rng rng(31);
    const int reps = 100000;
    std::vector<double> totals(reps);
    for (int r = 0; r < reps; ++r) {
        const int horizon = sample_horizon(alpha, rng.next_u01());
        int s = 0;
        double acc = 0.0;
        for (int t = 0; t <= horizon; ++t) {
            acc += c[s];
            s = (rng.next_u01() < stay) ? s : 1 - s;
        }
        totals[r] = acc;
    }
    const auto stats = summarize(totals);
    CHECK(std::abs(stats.mean - v0) <= 3.0 * stats.standard_error());
}

TEST_CASE("revealed scenario has one block per decision period") {
    const auto p = tiny();
    Rng rng(77);
    Rng blocks(78);
    for (int i = 0; i < 50; ++i) {
        const auto r = make_revealed_scenario(p, rng.next_u01(), blocks);
        CHECK(static_cast<int>(r.blocks.size()) == r.horizon + 1);
        for (const auto& b : r.blocks) CHECK(static_cast<int>(b.size()) == p.max_order);
    }
}

TEST_CASE("relaxed value: single-period case is the revealed myopic minimum") {
    const auto p = tiny();
    RevealedScenario revealed;
    revealed.horizon = 0;
    revealed.blocks.assign(1, std::vector<double>(p.max_order));
    Rng rng(5);
    rng.fill_u01(revealed.blocks[0]);

    const InventoryState start(0, {2, 1});
    const double got = relaxed_value(p, revealed, start);

    Simulator sim(p);
    const auto pmf = p.demand.pmf_row(0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> y(3);
    for (int z = 0; z <= p.max_order; ++z) {
        sim.sample_delivery_counts(z, revealed.blocks[0], y);
        double q = 0.0;
        DeliveryVector dv(3);
        dv.count = y;
        for (int d = 0; d <= p.demand.truncation(); ++d)
            q += pmf[d] * stage_cost(start, z, dv, d, p.costs).total;
        best = std::min(best, q);
    }
    CHECK(got == doctest::Approx(best).epsilon(1e-10));
}

namespace {
// Exact expected cost of a fixed constant-order policy on one revealed
// scenario: backward induction with the order size pinned.
double fixed_policy_revealed_cost(const Problem& p, const RevealedScenario& revealed,
                                  const InventoryState& start, int order) {
    const StateGrid grid{p.m(), p.x_cap, p.period()};
    Simulator sim(p);
    std::vector<double> v_next(grid.per_tau(), 0.0), v_cur(grid.per_tau(), 0.0);
    std::vector<int> y(p.m()), x(p.m() - 1), next(p.m() - 1);
    for (int t = revealed.horizon; t >= 0; --t) {
        const int tau = (start.tau + t) % p.period();
        const auto pmf = p.demand.pmf_row(tau);
        sim.sample_delivery_counts(order, revealed.blocks[t], y);
        for (std::size_t idx = 0; idx < grid.per_tau(); ++idx) {
            grid.decode(idx, x);
            int total = 0;
            for (int v : x) total += v;
            double q = order > 0 ? p.costs.fixed : 0.0;
            for (int d = 0; d <= p.demand.truncation(); ++d) {
                transition_raw(x, y, d, p.x_cap, next);
                const int over = total + order - d;
                double c = over >= 0 ? p.costs.holding * over : -p.costs.shortage * over;
                c += p.costs.wastage * positive_part(x[0] + y[0] - d);
                q += pmf[d] * (c + v_next[grid.encode(next)]);
            }
            v_cur[idx] = q;
        }
        v_next.swap(v_cur);
    }
    return v_next[grid.encode(start.onhand)];
}
}  // namespace

TEST_CASE("relaxed value never exceeds a fixed policy's revealed cost") {
    const auto p = tiny();
    Rng hrng(41), brng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const auto revealed = make_revealed_scenario(p, hrng.next_u01(), brng);
        const InventoryState start(0, {1, 2});
        const double relaxed = relaxed_value(p, revealed, start);
        const double fixed3 = fixed_policy_revealed_cost(p, revealed, start, 3);
        const double fixed0 = fixed_policy_revealed_cost(p, revealed, start, 0);
        CHECK(relaxed <= fixed3 + 1e-9);
        CHECK(relaxed <= fixed0 + 1e-9);
    }
}

TEST_CASE("degenerate revealed information: deterministic shelf-life bound is tight") {
    Problem p = tiny(0.9);
    p.shelf = ShelfLifeModel::deterministic_fresh(3);
    const auto sol = value_iteration(p, {.tol = 1e-8});
    const InventoryState start(0, {0, 0});
    const auto lb = lower_bound(p, start, 4000, 91, 2);
    const double vstar = sol.values.at(0, start.onhand);
    CHECK(std::abs(lb.estimate - vstar) <= 3.0 * lb.standard_error);
}

TEST_CASE("lower bound is valid and reproducible") {
    const auto p = tiny(0.9);
    const auto sol = value_iteration(p, {.tol = 1e-8});
    const InventoryState start(0, {0, 0});
    const auto lb = lower_bound(p, start, 600, 17, 2);
    const double vstar = sol.values.at(0, start.onhand);
    CHECK(lb.estimate - 2.0 * lb.standard_error <= vstar);
    // a real information gap: the bound should sit below the optimum
    CHECK(lb.estimate < vstar);

    const auto again = lower_bound(p, start, 600, 17, 1);
    CHECK(lb.estimate == again.estimate);
    CHECK(lb.ci_halfwidth == again.ci_halfwidth);

    CHECK_THROWS_AS(lower_bound(p, start, 1, 17, 1), std::invalid_argument);
}

TEST_CASE("state-space budget guard") {
    Problem p = tiny();
    p.shelf = ShelfLifeModel(5, {1.9, 3.1, 3.1, 2.5}, {-0.03, -0.06, -0.03, -0.09});
    p.max_order = 20;
    p.x_cap = 20;
    RevealedScenario revealed;
    revealed.horizon = 0;
    revealed.blocks.assign(1, std::vector<double>(p.max_order, 0.5));
    CHECK_THROWS_AS(relaxed_value(p, revealed, InventoryState::zero(0, 5)),
                    std::invalid_argument);
}
