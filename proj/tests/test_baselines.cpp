#include <doctest.h>

#include <cmath>
#include <vector>

#include "padp/baselines.hpp"

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

TEST_CASE("myopic policy equals the zero-discount optimal policy pointwise") {
    auto p = tiny();
    Problem p0 = p;
    p0.costs.discount = 0.0;
    const auto sol0 = value_iteration(p0, {.tol = 1e-10});

    GreedyEvaluator eval(p);
    auto scratch = eval.make_scratch();
    const auto myopic = PolicyHandle::myopic(GreedyMode::Exact);
    Rng rng(1);
    std::vector<int> x(2);
    for (int tau = 0; tau < 2; ++tau)
        for (std::size_t idx = 0; idx < sol0.values.grid.per_tau(); ++idx) {
            sol0.values.grid.decode(idx, x);
            CHECK(myopic.decide(eval, tau, x, rng, scratch) == sol0.policy.action[tau][idx]);
        }
}

TEST_CASE("myopic orders to cover demand when shortage dominates") {
    auto p = tiny();
    p.costs = {1.0, 1.0, 50.0, 1.0, 0.9};
    GreedyEvaluator eval(p);
    auto scratch = eval.make_scratch();
    Rng rng(2);
    const std::vector<int> empty{0, 0};
    const auto myopic = PolicyHandle::myopic(GreedyMode::Exact);
    const int z = myopic.decide(eval, 0, empty, rng, scratch);
    CHECK(z >= 2);  // expected demand is 1.5 on tau=0; cover most of it
}

TEST_CASE("deterministic-shelf-life policy is optimal when reality is deterministic") {
    Problem p = tiny();
    p.shelf = ShelfLifeModel::deterministic_fresh(3);
    const auto assumed = deterministic_shelf_life_policy(p, {.tol = 1e-8});
    const auto truth = value_iteration(p, {.tol = 1e-8});
    const auto pv = policy_value(p, assumed.policy, {.tol = 1e-8});
    for (int tau = 0; tau < 2; ++tau)
        for (std::size_t i = 0; i < pv.v[tau].size(); ++i)
            CHECK(pv.v[tau][i] == doctest::Approx(truth.values.v[tau][i]).epsilon(1e-5));
}

TEST_CASE("lookup and constant policy handles resolve states") {
    auto p = tiny();
    const auto sol = value_iteration(p, {.tol = 1e-8});
    GreedyEvaluator eval(p);
    auto scratch = eval.make_scratch();
    Rng rng(3);
    const auto lk = PolicyHandle::lookup(sol.policy, "optimal");
    const std::vector<int> x{2, 1};
    CHECK(lk.decide(eval, 0, x, rng, scratch) == sol.policy.at(0, x));
    CHECK(lk.label() == "optimal");
    const auto c = PolicyHandle::constant(0);
    CHECK(c.decide(eval, 1, x, rng, scratch) == 0);
}

TEST_CASE("exogenous refit recovers an exogenous truth within sampling bounds") {
    Problem p = tiny();
    const std::vector<double> truth{0.25, 0.45, 0.30};
    p.shelf = ShelfLifeModel::from_probabilities(truth);
    const auto refit =
        exogenous_refit(p, PolicyHandle::constant(5), 4000, 100, 99, 2);
    CHECK(refit.delivered_units == 4000L * 5L);
    CHECK_FALSE(refit.smoothed);
    for (int k = 0; k < 3; ++k) {
        const double se =
            std::sqrt(truth[k] * (1.0 - truth[k]) / static_cast<double>(refit.delivered_units));
        CHECK(std::abs(refit.category_probabilities[k] - truth[k]) <= 3.0 * se);
        // intercept-only logit reproduces the frequencies exactly
        CHECK(refit.model.probabilities(0)[k] ==
              doctest::Approx(refit.category_probabilities[k]).epsilon(1e-12));
        CHECK(refit.model.probabilities(7)[k] ==
              doctest::Approx(refit.category_probabilities[k]).epsilon(1e-12));
    }
}

TEST_CASE("exogenous refit guards") {
    auto p = tiny();
    CHECK_THROWS_WITH_AS(exogenous_refit(p, PolicyHandle::constant(0), 500, 100, 7, 1),
                         doctest::Contains("no delivery data"), std::runtime_error);

    // deterministic-fresh truth never delivers old units: smoothing kicks in
    Problem q = tiny();
    q.shelf = ShelfLifeModel::deterministic_fresh(3);
    const auto refit = exogenous_refit(q, PolicyHandle::constant(4), 400, 100, 7, 1);
    CHECK(refit.smoothed);
    CHECK(refit.category_probabilities[2] > 0.99);
    CHECK(refit.category_probabilities[0] > 0.0);
}

TEST_CASE("refit period and seed knobs change the sample deterministically") {
    auto p = tiny();
    const auto a = exogenous_refit(p, PolicyHandle::constant(3), 600, 100, 5, 2);
    const auto b = exogenous_refit(p, PolicyHandle::constant(3), 600, 100, 5, 1);
    for (int k = 0; k < 3; ++k)
        CHECK(a.category_probabilities[k] == b.category_probabilities[k]);
    const auto c = exogenous_refit(p, PolicyHandle::constant(3), 600, 100, 6, 2);
    bool any_diff = false;
    for (int k = 0; k < 3; ++k)
        any_diff = any_diff || a.category_probabilities[k] != c.category_probabilities[k];
    CHECK(any_diff);
}
