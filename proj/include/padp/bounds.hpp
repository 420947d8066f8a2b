#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "padp/exact_dp.hpp"
#include "padp/parallel.hpp"
#include "padp/rng.hpp"
#include "padp/simulate.hpp"
#include "padp/stats.hpp"

namespace padp {

// Geometric horizon draw: P(T = t) = (1 - alpha) * alpha^t for t >= 0,
// equivalently T = floor(ln(1-u) / ln(alpha)).
inline int sample_horizon(double alpha, double u) {
    if (!(alpha >= 0.0) || !(alpha < 1.0)) throw std::domain_error("alpha must be in [0,1)");
    if (!(u >= 0.0) || !(u < 1.0)) throw std::domain_error("u must be in [0,1)");
    if (alpha == 0.0 || u == 0.0) return 0;
    return static_cast<int>(std::floor(std::log1p(-u) / std::log(alpha)));
}

// One realization of the revealed information: a horizon length and, for each
// of the T+1 decision periods, one block of max_order uniforms that fixes the
// delivery outcome for every possible order size in that period.
struct RevealedScenario {
    int horizon = 0;                            // T
    std::vector<std::vector<double>> blocks;    // T+1 blocks of max_order uniforms
};

inline RevealedScenario make_revealed_scenario(const Problem& problem, double horizon_u,
                                               Rng& block_rng) {
    RevealedScenario r;
    r.horizon = sample_horizon(problem.costs.discount, horizon_u);
    r.blocks.assign(r.horizon + 1, std::vector<double>(problem.max_order));
    for (auto& b : r.blocks) block_rng.fill_u01(b);
    return r;
}

// Optimal undiscounted total cost of the (T+1)-period problem in which the
// delivery outcome of every order size is known in advance (through the
// revealed uniform blocks) while demand stays random with its exact pmf.
// Backward induction over the truncated grid, two period layers in memory.
inline double relaxed_value(const Problem& problem, const RevealedScenario& revealed,
                            const InventoryState& start, int workers = 1,
                            std::size_t state_budget = 20000) {
    const int m = problem.m();
    const int cap = problem.x_cap;
    const int zmax = problem.max_order;
    const int dmax = problem.demand.truncation();
    const StateGrid grid{m, cap, problem.period()};
    const std::size_t n_states = grid.per_tau();
    if (n_states > state_budget)
        throw std::invalid_argument(
            "relaxed_value: state space exceeds the backward-induction budget; "
            "reduce max_order / x_cap or the shelf-life m");

    Simulator sim(problem);
    std::vector<double> v_next(n_states, 0.0), v_cur(n_states, 0.0);
    // deliveries revealed for the whole period, per order size
    std::vector<std::vector<int>> delivery(zmax + 1, std::vector<int>(m, 0));

    for (int t = revealed.horizon; t >= 0; --t) {
        const int tau = (start.tau + t) % problem.period();
        const auto pmf = problem.demand.pmf_row(tau);
        for (int z = 0; z <= zmax; ++z)
            sim.sample_delivery_counts(z, revealed.blocks[t], delivery[z]);

        if (m == 3) {
            // pooled-coordinate sweep, one demand table per (a, b, y3)
            const int amax = cap + zmax;
            const std::size_t ab = static_cast<std::size_t>(amax + 1);
            std::vector<double> u(ab * ab * static_cast<std::size_t>(zmax + 1));
            parallel_for(ab, workers, [&](std::size_t ai) {
                const int a = static_cast<int>(ai);
                for (int b = 0; b <= amax; ++b) {
                    double* row = &u[(ai * ab + static_cast<std::size_t>(b)) * (zmax + 1)];
                    for (int y3 = 0; y3 <= zmax; ++y3) {
                        double acc = 0.0;
                        for (int d = 0; d <= dmax; ++d) {
                            const int x1n =
                                std::min(positive_part(b - positive_part(d - a)), cap);
                            const int x2n =
                                std::min(positive_part(y3 - positive_part(d - a - b)), cap);
                            acc += pmf[d] *
                                   v_next[static_cast<std::size_t>(x2n) * (cap + 1) + x1n];
                        }
                        row[y3] = acc;
                    }
                }
            });
            std::vector<double> g(2 * cap + zmax + 1, 0.0), w(amax + 1, 0.0);
            for (int c = 0; c <= 2 * cap + zmax; ++c) {
                double acc = 0.0;
                for (int d = 0; d <= dmax; ++d) {
                    const int over = c - d;
                    acc += pmf[d] * (over >= 0 ? problem.costs.holding * over
                                               : -problem.costs.shortage * over);
                }
                g[c] = acc;
            }
            for (int a = 0; a <= amax; ++a) {
                double acc = 0.0;
                for (int d = 0; d <= std::min(a - 1, dmax); ++d) acc += pmf[d] * (a - d);
                w[a] = acc;
            }
            parallel_for(static_cast<std::size_t>(cap + 1), workers, [&](std::size_t x2i) {
                const int x2 = static_cast<int>(x2i);
                for (int x1 = 0; x1 <= cap; ++x1) {
                    double best = std::numeric_limits<double>::infinity();
                    for (int z = 0; z <= zmax; ++z) {
                        const auto& y = delivery[z];
                        const int a = x1 + y[0];
                        const int b = x2 + y[1];
                        const double q = (z > 0 ? problem.costs.fixed : 0.0) + g[x1 + x2 + z] +
                                         problem.costs.wastage * w[a] +
                                         u[(static_cast<std::size_t>(a) * ab + b) * (zmax + 1) +
                                           y[2]];
                        if (q < best) best = q;
                    }
                    v_cur[x2i * (cap + 1) + x1] = best;
                }
            });
        } else {
            const std::size_t chunk = 256;
            const std::size_t n_chunks = (n_states + chunk - 1) / chunk;
            parallel_for(n_chunks, workers, [&](std::size_t ci) {
                std::vector<int> x(m - 1), next(m - 1);
                const std::size_t lo = ci * chunk, hi = std::min(n_states, lo + chunk);
                for (std::size_t idx = lo; idx < hi; ++idx) {
                    grid.decode(idx, x);
                    int total = 0;
                    for (int v : x) total += v;
                    double best = std::numeric_limits<double>::infinity();
                    for (int z = 0; z <= zmax; ++z) {
                        const auto& y = delivery[z];
                        double q = z > 0 ? problem.costs.fixed : 0.0;
                        for (int d = 0; d <= dmax; ++d) {
                            transition_raw(x, y, d, cap, next);
                            const int over = total + z - d;
                            double c = over >= 0 ? problem.costs.holding * over
                                                 : -problem.costs.shortage * over;
                            c += problem.costs.wastage * positive_part(x[0] + y[0] - d);
                            q += pmf[d] * (c + v_next[grid.encode(next)]);
                        }
                        if (q < best) best = q;
                    }
                    v_cur[idx] = best;
                }
            });
        }
        v_next.swap(v_cur);
    }
    return v_next[grid.encode(start.onhand)];
}

struct LowerBoundResult {
    double estimate = 0.0;
    double ci_halfwidth = 0.0;
    double standard_error = 0.0;
    int replications = 0;
};

// Monte-Carlo estimate of E[relaxed value]: a valid lower bound on the
// discounted optimum at `start` for the truncated problem.
inline LowerBoundResult lower_bound(const Problem& problem, const InventoryState& start,
                                    int n_reps, std::uint64_t seed, int workers = 1) {
    if (n_reps < 2) throw std::invalid_argument("lower_bound: need at least 2 replications");
    std::vector<double> values(n_reps, 0.0);
    parallel_for(static_cast<std::size_t>(n_reps), workers, [&](std::size_t rep) {
        Rng horizon_rng = make_stream(seed, StreamPurpose::Horizon, rep);
        Rng block_rng = make_stream(seed, StreamPurpose::Revealed, rep);
        const auto revealed = make_revealed_scenario(problem, horizon_rng.next_u01(), block_rng);
        values[rep] = relaxed_value(problem, revealed, start, 1);
    });
    const auto stats = summarize(values);
    return {stats.mean, stats.ci_halfwidth(), stats.standard_error(), n_reps};
}

}  // namespace padp
