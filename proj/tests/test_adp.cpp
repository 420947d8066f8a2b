#include <doctest.h>

#include <cmath>
#include <vector>

#include "padp/adp.hpp"
#include "padp/exact_dp.hpp"
#include "padp/linalg.hpp"

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

struct TableCont {
    const ValueTable* table;
    double operator()(int tau, std::span<const int> x) const {
        return table->v[tau][table->grid.encode(x)];
    }
};

}  // namespace

TEST_CASE("least squares: orthogonal residuals and minimum-norm fallback") {
    Rng rng(404);
    const std::size_t n = 240, k = 6;
    ColMatrix a(n, k);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) a(r, c) = rng.next_u01() * 10.0 - 5.0;
        y[r] = rng.next_u01() * 100.0;
    }
    ColMatrix a_copy = a;
    const auto fit = solve_least_squares(std::move(a), y);
    CHECK_FALSE(fit.rank_deficient);
    CHECK(fit.rank == static_cast<int>(k));
    // residual orthogonal to every column, 1e-6 relative
    std::vector<double> resid(n);
    for (std::size_t r = 0; r < n; ++r) {
        double pred = 0.0;
        for (std::size_t c = 0; c < k; ++c) pred += a_copy(r, c) * fit.coefficients[c];
        resid[r] = y[r] - pred;
    }
    for (std::size_t c = 0; c < k; ++c) {
        double dot = 0.0, col_norm = 0.0, res_norm = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            dot += a_copy(r, c) * resid[r];
            col_norm += a_copy(r, c) * a_copy(r, c);
            res_norm += resid[r] * resid[r];
        }
        CHECK(std::abs(dot) <= 1e-6 * std::sqrt(col_norm * res_norm) + 1e-12);
    }

    // duplicate a column: rank deficiency flagged, minimum-norm solution
    // splits the weight between the twins
    ColMatrix b(n, 3);
    std::vector<double> y2(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double u = rng.next_u01();
        b(r, 0) = u;
        b(r, 1) = u;
        b(r, 2) = rng.next_u01();
        y2[r] = 3.0 * u + b(r, 2);
    }
    const auto fit2 = solve_least_squares(std::move(b), y2);
    CHECK(fit2.rank_deficient);
    CHECK(fit2.coefficients[0] == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(fit2.coefficients[1] == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(fit2.coefficients[2] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("greedy against the exact value table recovers the optimal policy") {
    const auto p = tiny();
    const auto sol = value_iteration(p, {.tol = 1e-9});
    GreedyEvaluator eval(p);
    REQUIRE(eval.exact_available());
    auto scratch = eval.make_scratch();
    TableCont cont{&sol.values};
    std::vector<int> x(2);
    for (int tau = 0; tau < 2; ++tau)
        for (std::size_t idx = 0; idx < sol.values.grid.per_tau(); ++idx) {
            sol.values.grid.decode(idx, x);
            CHECK(eval.decide_exact(tau, x, cont, scratch) == sol.policy.action[tau][idx]);
        }
}

TEST_CASE("monte-carlo greedy agrees with exact greedy on nearly all states") {
    const auto p = tiny();
    const auto sol = value_iteration(p, {.tol = 1e-9});
    GreedyEvaluator eval(p, 512, 100000);
    auto scratch = eval.make_scratch();
    TableCont cont{&sol.values};
    Rng state_rng(555);
    int agree = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const int tau = state_rng.next_int(0, 1);
        std::vector<int> x{state_rng.next_int(0, 8), state_rng.next_int(0, 8)};
        Rng policy_rng = make_stream(99, StreamPurpose::PolicySampling, 0, t);
        const int a = eval.decide_mc(tau, x, cont, policy_rng, scratch);
        const int b = eval.decide_exact(tau, x, cont, scratch);
        agree += (a == b) ? 1 : 0;
    }
    CHECK(agree >= static_cast<int>(trials * 0.99));
}

TEST_CASE("zero coefficients reproduce the myopic action in both modes") {
    const auto p = tiny();
    GreedyEvaluator eval(p, 512, 20000);
    auto scratch = eval.make_scratch();
    auto v1 = std::make_shared<const ScalarValueTable>(nonperishable_value(p, {.tol = 1e-8}));
    const auto zeros = ValueApprox::zeros(BasisSpec{2, 3}, p.period(), v1);
    auto zero_cont = [](int, std::span<const int>) { return 0.0; };
    Rng state_rng(7);
    for (int t = 0; t < 50; ++t) {
        const int tau = state_rng.next_int(0, 1);
        std::vector<int> x{state_rng.next_int(0, 8), state_rng.next_int(0, 8)};
        CHECK(greedy_action(eval, GreedyMode::Exact, tau, x, zeros, state_rng, scratch) ==
              eval.decide_exact(tau, x, zero_cont, scratch));
        // same uniform block for both MC searches
        Rng a_rng = make_stream(5, StreamPurpose::PolicySampling, 1, t);
        Rng b_rng = make_stream(5, StreamPurpose::PolicySampling, 1, t);
        CHECK(greedy_action(eval, GreedyMode::MonteCarlo, tau, x, zeros, a_rng, scratch) ==
              eval.decide_mc(tau, x, zero_cont, b_rng, scratch));
    }
}

TEST_CASE("discounted tail-sum estimator is unbiased on a two-state chain") {
    // hand-built 2-state MDP: costs c = (1, 4), symmetric switching p = 0.3
    const double alpha = 0.8;
    const double c[2] = {1.0, 4.0};
    const double stay = 0.7;
    // closed form: v = (I - alpha P)^{-1} c
    const double a11 = 1.0 - alpha * stay, a12 = -alpha * (1.0 - stay);
    const double det = a11 * a11 - a12 * a12;
    const double v0 = (a11 * c[0] - a12 * c[1]) / det;

    Rng rng(2718);
    const int reps = 10000, horizon = 120;
    std::vector<double> sums(reps);
    for (int r = 0; r < reps; ++r) {
        int s = 0;
        double acc = 0.0, disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            acc += disc * c[s];
            disc *= alpha;
            s = (rng.next_u01() < stay) ? s : 1 - s;
        }
        sums[r] = acc;
    }
    const auto stats = summarize(sums);
    CHECK(std::abs(stats.mean - v0) <= 3.0 * stats.standard_error() + 1e-9);
}

TEST_CASE("approximate policy iteration: smoothing, bookkeeping, determinism") {
    const auto p = tiny(0.85);
    ApiOptions opts;
    opts.choice = 2;
    opts.replications = 4;
    opts.horizon = 40;
    opts.iterations = 3;
    opts.seed = 11;
    opts.workers = 1;
    const auto run = run_approximate_policy_iteration(p, opts);

    REQUIRE(run.iterations.size() == 4);
    REQUIRE(run.smoothed.size() == 4);
    REQUIRE(run.fitted.size() == 3);

    // smoothing with weight 1/n is exactly the running average of the fits
    for (int n = 1; n <= 3; ++n) {
        for (int tau = 0; tau < p.period(); ++tau) {
            for (std::size_t cidx = 0; cidx < run.smoothed[n].beta[tau].size(); ++cidx) {
                double avg = 0.0;
                for (int i = 0; i < n; ++i) avg += run.fitted[i][tau][cidx];
                avg /= n;
                CHECK(std::abs(run.smoothed[n].beta[tau][cidx] - avg) <= 1e-9);
            }
        }
    }

    // iteration 0 is the zero-coefficient (myopic) policy
    for (int tau = 0; tau < p.period(); ++tau)
        for (double b : run.smoothed[0].beta[tau]) CHECK(b == 0.0);
    CHECK(run.best_iteration ==
          static_cast<int>(std::min_element(run.iterations.begin(), run.iterations.end(),
                                            [](const auto& a, const auto& b) {
                                                return a.cost_estimate < b.cost_estimate;
                                            }) -
                           run.iterations.begin()));

    // bit-identical rerun, and worker-count invariance
    const auto rerun = run_approximate_policy_iteration(p, opts);
    ApiOptions opts8 = opts;
    opts8.workers = 8;
    const auto run8 = run_approximate_policy_iteration(p, opts8);
    for (std::size_t i = 0; i < run.iterations.size(); ++i) {
        CHECK(run.iterations[i].cost_estimate == rerun.iterations[i].cost_estimate);
        CHECK(run.iterations[i].cost_estimate == run8.iterations[i].cost_estimate);
    }
    for (int tau = 0; tau < p.period(); ++tau)
        for (std::size_t cidx = 0; cidx < run.best.beta[tau].size(); ++cidx) {
            CHECK(run.best.beta[tau][cidx] == rerun.best.beta[tau][cidx]);
            CHECK(run.best.beta[tau][cidx] == run8.best.beta[tau][cidx]);
        }
}

TEST_CASE("N=1 reports the myopic cost estimate at iteration zero") {
    const auto p = tiny(0.85);
    ApiOptions opts;
    opts.replications = 3;
    opts.horizon = 30;
    opts.iterations = 1;
    opts.seed = 21;
    const auto run = run_approximate_policy_iteration(p, opts);
    REQUIRE(run.iterations.size() == 2);

    // the same estimate computed against an explicitly zero approximation
    auto v1 = std::make_shared<const ScalarValueTable>(nonperishable_value(p, {.tol = 1e-8}));
    GreedyEvaluator eval(p, 512, opts.n_mc);
    const auto myo = detail::estimate_greedy_cost(
        eval, ValueApprox::zeros(BasisSpec{opts.choice, p.m()}, p.period(), v1), GreedyMode::Auto,
        InventoryState::zero(0, p.m()), opts.horizon, opts.replications, opts.seed, 0, 1);
    CHECK(run.iterations[0].cost_estimate == doctest::Approx(myo.mean).epsilon(1e-12));
}
