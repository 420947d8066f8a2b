#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "padp/basis.hpp"
#include "padp/linalg.hpp"
#include "padp/parallel.hpp"
#include "padp/rng.hpp"
#include "padp/simulate.hpp"
#include "padp/stats.hpp"

namespace padp {

enum class GreedyMode { Auto, Exact, MonteCarlo };

// Reusable per-worker buffers for greedy searches.
struct GreedyScratch {
    std::vector<double> uniforms;  // n_mc blocks of (max_order + 1)
    std::vector<int> demand;       // one shared demand draw per block
    std::vector<int> delivery;
    std::vector<int> next;
    std::vector<double> features;
};

// One-step lookahead minimization over order sizes. The expectation is either
// exact (delivery compositions enumerated against the demand pmf) or a
// common-random-number sample average: every candidate order size consumes
// the same uniform blocks, so sampling error largely cancels between
// alternatives. Ties always resolve to the smallest order size.
class GreedyEvaluator {
  public:
    GreedyEvaluator(const Problem& problem, int exact_budget = 512, int n_mc = 1000)
        : p_(problem), sim_(problem), n_mc_(n_mc) {
        exact_ok_ = composition_count(p_.max_order, p_.m()) <=
                    static_cast<std::size_t>(exact_budget);
        if (exact_ok_) {
            support_.resize(p_.max_order + 1);
            for (int z = 0; z <= p_.max_order; ++z) {
                auto& list = support_[z];
                for_each_composition(z, p_.m(), [&](const DeliveryVector& y) {
                    const double w = p_.shelf.delivery_pmf(z, y);
                    if (w <= 0.0) return;
                    Entry e;
                    for (int k = 0; k < p_.m(); ++k) e.y[k] = y.count[k];
                    e.weight = w;
                    list.push_back(e);
                });
            }
        }
    }

    const Problem& problem() const { return p_; }
    const Simulator& simulator() const { return sim_; }
    bool exact_available() const { return exact_ok_; }
    int n_mc() const { return n_mc_; }

    GreedyScratch make_scratch() const {
        GreedyScratch s;
        s.uniforms.resize(static_cast<std::size_t>(n_mc_) * sim_.block_size());
        s.demand.resize(n_mc_);
        s.delivery.resize(p_.m());
        s.next.resize(p_.m() - 1);
        s.features.resize(32);
        return s;
    }

    bool use_exact(GreedyMode mode) const {
        if (mode == GreedyMode::Exact) {
            if (!exact_ok_) throw std::invalid_argument("exact greedy beyond enumeration budget");
            return true;
        }
        return mode == GreedyMode::Auto && exact_ok_;
    }

    // Exact one-step cost of a single candidate order size.
    template <typename V>
    double exact_action_value(int tau, std::span<const int> x, int z, V&& cont,
                              GreedyScratch& scratch) const {
        const auto pmf = p_.demand.pmf_row(tau);
        const int dmax = p_.demand.truncation();
        const int next_tau = (tau + 1) % p_.period();
        int total = 0;
        for (int v : x) total += v;
        double q = z > 0 ? p_.costs.fixed : 0.0;
        for (const auto& e : support_[z]) {
            const std::span<const int> delivery(e.y.data(), p_.m());
            double inner = 0.0;
            for (int d = 0; d <= dmax; ++d) {
                transition_raw(x, delivery, d, p_.x_cap, scratch.next);
                const int over = total + z - d;
                double c = over >= 0 ? p_.costs.holding * over : -p_.costs.shortage * over;
                c += p_.costs.wastage * positive_part(x[0] + e.y[0] - d);
                inner += pmf[d] * (c + p_.costs.discount * cont(next_tau, scratch.next));
            }
            q += e.weight * inner;
        }
        return q;
    }

    template <typename V>
    int decide_exact(int tau, std::span<const int> x, V&& cont, GreedyScratch& scratch) const {
        double best = std::numeric_limits<double>::infinity();
        int best_z = 0;
        for (int z = 0; z <= p_.max_order; ++z) {
            const double q = exact_action_value(tau, x, z, cont, scratch);
            if (q < best) {
                best = q;
                best_z = z;
            }
        }
        return best_z;
    }

    // Monte-Carlo mode: n_mc blocks are drawn eagerly from `policy_rng`, then
    // shared across all candidate order sizes.
    template <typename V>
    int decide_mc(int tau, std::span<const int> x, V&& cont, Rng& policy_rng,
                  GreedyScratch& scratch) const {
        const int bs = sim_.block_size();
        policy_rng.fill_u01(scratch.uniforms);
        for (int i = 0; i < n_mc_; ++i)
            scratch.demand[i] =
                p_.demand.sample(tau, scratch.uniforms[static_cast<std::size_t>(i) * bs + bs - 1]);

        int total = 0;
        for (int v : x) total += v;
        const int next_tau = (tau + 1) % p_.period();
        double best = std::numeric_limits<double>::infinity();
        int best_z = 0;
        for (int z = 0; z <= p_.max_order; ++z) {
            double acc = 0.0;
            for (int i = 0; i < n_mc_; ++i) {
                const std::span<const double> block(
                    scratch.uniforms.data() + static_cast<std::size_t>(i) * bs,
                    static_cast<std::size_t>(bs));
                sim_.sample_delivery_counts(z, block, scratch.delivery);
                const int d = scratch.demand[i];
                transition_raw(x, scratch.delivery, d, p_.x_cap, scratch.next);
                const int over = total + z - d;
                double c = over >= 0 ? p_.costs.holding * over : -p_.costs.shortage * over;
                c += p_.costs.wastage * positive_part(x[0] + scratch.delivery[0] - d);
                acc += c + p_.costs.discount * cont(next_tau, scratch.next);
            }
            double q = acc / n_mc_ + (z > 0 ? p_.costs.fixed : 0.0);
            if (q < best) {
                best = q;
                best_z = z;
            }
        }
        return best_z;
    }

    template <typename V>
    int decide(GreedyMode mode, int tau, std::span<const int> x, V&& cont, Rng& policy_rng,
               GreedyScratch& scratch) const {
        if (use_exact(mode)) return decide_exact(tau, x, cont, scratch);
        return decide_mc(tau, x, cont, policy_rng, scratch);
    }

  private:
    struct Entry {
        std::array<int, 8> y{};
        double weight = 0.0;
    };

    Problem p_;
    Simulator sim_;
    int n_mc_;
    bool exact_ok_ = false;
    std::vector<std::vector<Entry>> support_;
};

// Greedy one-step lookahead against a fitted approximation.
template <typename ApproxLike>
int greedy_action(const GreedyEvaluator& eval, GreedyMode mode, int tau, std::span<const int> x,
                  const ApproxLike& approx, Rng& policy_rng, GreedyScratch& scratch) {
    auto cont = [&](int next_tau, std::span<const int> next_x) {
        return approx.evaluate(next_tau, next_x, scratch.features);
    };
    return eval.decide(mode, tau, x, cont, policy_rng, scratch);
}

// The approximation tabulated over the truncated grid. Greedy searches probe
// the continuation tens of thousands of times per decision with coefficients
// that stay fixed for a whole iteration, so one sweep of feature evaluations
// buys lookup-cost continuations everywhere.
class CachedApprox {
  public:
    CachedApprox(const ValueApprox& approx, const StateGrid& grid) : grid_(grid) {
        table_.assign(grid.period, std::vector<double>(grid.per_tau(), 0.0));
        std::vector<double> scratch(approx.spec.feature_count());
        std::vector<int> x(grid.dim());
        for (int tau = 0; tau < grid.period; ++tau)
            for (std::size_t idx = 0; idx < grid.per_tau(); ++idx) {
                grid.decode(idx, x);
                table_[tau][idx] = approx.evaluate(tau, x, scratch);
            }
    }

    static bool fits(const StateGrid& grid) { return grid.per_tau() <= (1u << 19); }

    double evaluate(int tau, std::span<const int> x, std::span<double>) const {
        return table_[tau][grid_.encode(x)];
    }

  private:
    StateGrid grid_;
    std::vector<std::vector<double>> table_;
};

struct ApiOptions {
    int choice = 2;
    int replications = 30;  // trajectories per iteration
    int horizon = 100;
    int iterations = 30;
    int n_mc = 1000;
    int exact_budget = 512;
    GreedyMode mode = GreedyMode::Auto;
    int tail_exclude = -1;       // trailing visits dropped from regressions; -1 -> m
    int tail_periods = -1;       // extra simulated periods backing the cost-to-go
                                 // tails; -1 -> enough for a <= 5% truncation bias
    int eval_replications = -1;  // replications for per-iteration cost estimates; -1 -> Q
    double ls_rcond = 0.01;      // singular-value cutoff of the regression solve
    std::uint64_t seed = 1;
    int workers = 1;
};

// Discounted tail sums truncate at the simulation end; visits need enough
// remaining periods that the missing mass alpha^(remaining) is small.
inline int default_tail_periods(double alpha) {
    if (alpha <= 0.0) return 0;
    return static_cast<int>(std::ceil(std::log(0.05) / std::log(alpha)));
}

struct IterationRecord {
    int iteration = 0;  // 0 is the initial zero-coefficient (myopic) policy
    double cost_estimate = 0.0;
    double ci_halfwidth = 0.0;
    double beta_l2 = 0.0;
    bool rank_deficient = false;
};

struct ApiResult {
    ValueApprox best;
    int best_iteration = 0;
    std::vector<IterationRecord> iterations;
    // raw least-squares fits (before smoothing), kept for diagnostics
    std::vector<std::vector<std::vector<double>>> fitted;
    std::vector<ValueApprox> smoothed;  // beta^0 .. beta^N
};

namespace detail {

// Discounted-cost estimate of the greedy policy for `approx` from a fixed
// start state; streams are keyed by (seed, purpose, tag, replication) so the
// estimate is reproducible and independent of the worker count.
template <typename ApproxLike>
SampleStats estimate_greedy_cost(const GreedyEvaluator& eval, const ApproxLike& approx,
                                 GreedyMode mode, const InventoryState& start, int horizon,
                                 int replications, std::uint64_t seed, std::uint64_t tag,
                                 int workers) {
    const Problem& p = eval.problem();
    std::vector<double> costs(replications, 0.0);
    parallel_for(static_cast<std::size_t>(replications), workers, [&](std::size_t rep) {
        Rng outcome = make_stream(seed, StreamPurpose::Evaluation, tag, rep);
        Rng policy = make_stream(seed, StreamPurpose::PolicySampling, tag ^ 0x9e37ULL, rep);
        GreedyScratch scratch = eval.make_scratch();
        double total = 0.0;
        double disc = 1.0;
        simulate_trajectory(
            p, eval.simulator(), start, horizon, outcome,
            [&](int tau, std::span<const int> x) {
                return greedy_action(eval, mode, tau, x, approx, policy, scratch);
            },
            [&](int, const InventoryState&, const PeriodRecord& rec) {
                total += disc * rec.outcome.cost.total;
                disc *= p.costs.discount;
            });
        costs[rep] = total;
    });
    return summarize(costs);
}

}  // namespace detail

// Simulation-based approximate policy iteration: simulate greedy trajectories
// under the current coefficients, estimate discounted cost-to-go at every
// visited state from the trajectory tail, refit each time index by least
// squares, then average the fit into the running coefficients with weight
// 1/n. The iterate with the lowest start-state cost estimate wins.
inline ApiResult run_approximate_policy_iteration(const Problem& problem, const ApiOptions& opts) {
    problem.validate();
    const int gamma = problem.period();
    const int horizon = opts.horizon;
    const int reps = opts.replications;
    const int tail = opts.tail_exclude < 0 ? problem.m() : opts.tail_exclude;
    if (reps < 1 || horizon < 1 || opts.iterations < 1)
        throw std::invalid_argument("approximate policy iteration needs Q, H, N >= 1");

    BasisSpec spec{opts.choice, problem.m()};
    spec.validate();
    const int k = spec.feature_count();

    auto v1 = std::make_shared<const ScalarValueTable>(nonperishable_value(problem));
    GreedyEvaluator eval(problem, opts.exact_budget, opts.n_mc);
    const InventoryState eval_start = InventoryState::zero(0, problem.m());
    const int eval_reps = opts.eval_replications > 0 ? opts.eval_replications : reps;
    const StateGrid grid{problem.m(), problem.x_cap, problem.period()};
    const bool cache_ok = CachedApprox::fits(grid);

    // One fixed evaluation tag for every iterate: the per-iteration cost
    // estimates share their outcome streams, so the best-iterate selection
    // compares candidates on common random numbers instead of independent
    // noise.
    const auto estimate = [&](const ValueApprox& approx) {
        constexpr std::uint64_t tag = 0;
        if (cache_ok)
            return detail::estimate_greedy_cost(eval, CachedApprox(approx, grid), opts.mode,
                                                eval_start, horizon, eval_reps, opts.seed, tag,
                                                opts.workers);
        return detail::estimate_greedy_cost(eval, approx, opts.mode, eval_start, horizon,
                                            eval_reps, opts.seed, tag, opts.workers);
    };

    ApiResult result;
    ValueApprox beta = ValueApprox::zeros(spec, gamma, v1);
    result.smoothed.push_back(beta);
    {
        const auto stats = estimate(beta);
        result.iterations.push_back({0, stats.mean, stats.ci_halfwidth(), 0.0, false});
    }

    // per-replication visit records, merged in replication order
    struct RepData {
        std::vector<int> tau;
        std::vector<std::vector<int>> state;
        std::vector<double> cost_to_go;
    };

    // Visited states come from the first `horizon` periods; the simulation
    // continues for `tail_periods` more so every cost-to-go tail covers a
    // long horizon (truncation bias <= alpha^tail_periods of the end value).
    const int tail_periods = opts.tail_periods >= 0
                                 ? opts.tail_periods
                                 : default_tail_periods(problem.costs.discount);
    const int sim_horizon = horizon + tail_periods;

    const auto collect_iteration = [&](int n, const auto& prev_like, std::vector<RepData>& data) {
        parallel_for(static_cast<std::size_t>(reps), opts.workers, [&](std::size_t rep) {
            Rng outcome = make_stream(opts.seed, StreamPurpose::TrajectoryOutcome,
                                      static_cast<std::uint64_t>(n), rep);
            Rng policy = make_stream(opts.seed, StreamPurpose::PolicySampling,
                                     static_cast<std::uint64_t>(n), rep);
            Rng init = make_stream(opts.seed, StreamPurpose::InitialState,
                                   static_cast<std::uint64_t>(n), rep);
            GreedyScratch scratch = eval.make_scratch();

            InventoryState start(init.next_int(0, gamma - 1),
                                 std::vector<int>(problem.m() - 1, 0));
            for (auto& v : start.onhand) v = init.next_int(0, problem.max_order);

            RepData& rd = data[rep];
            rd.tau.reserve(horizon);
            rd.state.reserve(horizon);
            std::vector<double> stage(sim_horizon);
            simulate_trajectory(
                problem, eval.simulator(), start, sim_horizon, outcome,
                [&](int tau, std::span<const int> x) {
                    return greedy_action(eval, opts.mode, tau, x, prev_like, policy, scratch);
                },
                [&](int t, const InventoryState& s, const PeriodRecord& rec) {
                    if (t < horizon) {
                        rd.tau.push_back(s.tau);
                        rd.state.push_back(s.onhand);
                    }
                    stage[t] = rec.outcome.cost.total;
                });
            // discounted tail sums over the full simulated span
            rd.cost_to_go.assign(horizon, 0.0);
            double acc = 0.0;
            for (int t = sim_horizon - 1; t >= 0; --t) {
                acc = stage[t] + problem.costs.discount * acc;
                if (t < horizon) rd.cost_to_go[t] = acc;
            }
        });
    };

    for (int n = 1; n <= opts.iterations; ++n) {
        std::vector<RepData> data(reps);
        if (cache_ok)
            collect_iteration(n, CachedApprox(beta, grid), data);
        else
            collect_iteration(n, beta, data);

        // assemble per-tau regressions in fixed replication order
        std::vector<std::vector<std::vector<int>>> xs(gamma);
        std::vector<std::vector<double>> ys(gamma);
        const int keep = horizon - tail;
        for (int rep = 0; rep < reps; ++rep) {
            const RepData& rd = data[rep];
            for (int t = 0; t < keep; ++t) {
                const int tau = rd.tau[t];
                xs[tau].push_back(rd.state[t]);
                ys[tau].push_back(rd.cost_to_go[t]);
            }
        }

        bool any_deficient = false;
        std::vector<std::vector<double>> star(gamma);
        std::vector<double> feat(k);
        for (int tau = 0; tau < gamma; ++tau) {
            const std::size_t rows = xs[tau].size();
            if (rows == 0) {
                star[tau] = beta.beta[tau];  // nothing visited; carry over
                any_deficient = true;
                continue;
            }
            ColMatrix a(rows, k);
            for (std::size_t r = 0; r < rows; ++r) {
                spec.features(*v1, tau, xs[tau][r], feat);
                for (int c = 0; c < k; ++c) a(r, c) = feat[c];
            }
            auto fit = solve_least_squares(std::move(a), ys[tau], opts.ls_rcond);
            any_deficient = any_deficient || fit.rank_deficient;
            star[tau] = std::move(fit.coefficients);
        }
        result.fitted.push_back(star);

        const double lambda = 1.0 / static_cast<double>(n);
        for (int tau = 0; tau < gamma; ++tau)
            for (int c = 0; c < k; ++c)
                beta.beta[tau][c] = (1.0 - lambda) * beta.beta[tau][c] + lambda * star[tau][c];
        result.smoothed.push_back(beta);

        const auto stats = estimate(beta);
        double norm = 0.0;
        for (const auto& row : beta.beta)
            for (double v : row) norm += v * v;
        result.iterations.push_back(
            {n, stats.mean, stats.ci_halfwidth(), std::sqrt(norm), any_deficient});
    }

    int best = 0;
    for (std::size_t i = 1; i < result.iterations.size(); ++i)
        if (result.iterations[i].cost_estimate < result.iterations[best].cost_estimate)
            best = static_cast<int>(i);
    result.best_iteration = best;
    result.best = result.smoothed[best];
    return result;
}

}  // namespace padp
