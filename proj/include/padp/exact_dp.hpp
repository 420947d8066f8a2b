#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padp/io.hpp"
#include "padp/mdp.hpp"
#include "padp/parallel.hpp"
#include "padp/state_grid.hpp"

namespace padp {

// Discounted values over the truncated state grid, one array per time index.
struct ValueTable {
    StateGrid grid;
    std::vector<std::vector<double>> v;  // v[tau][state index]
    double residual = 0.0;               // final sup-norm Bellman residual
    int iterations = 0;

    double at(int tau, std::span<const int> x) const { return v[tau][grid.encode(x)]; }
};

// Greedy order size per state.
struct PolicyTable {
    StateGrid grid;
    std::vector<std::vector<int>> action;  // action[tau][state index]

    int at(int tau, std::span<const int> x) const { return action[tau][grid.encode(x)]; }
    bool operator==(const PolicyTable&) const = default;
};

struct SolveOptions {
    double tol = 1e-6;
    int max_iters = 5000;
    int workers = 1;
    // Exact solves are guarded to small instances; set to true to accept the
    // memory/time cost of larger grids anyway.
    bool allow_large_state_space = false;
};

class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(std::string msg, double residual)
        : std::runtime_error(std::move(msg)), last_residual(residual) {}
    double last_residual;
};

namespace detail {

struct CompositionEntry {
    std::array<int, 8> y{};  // m counts, oldest first (padded)
    double weight = 0.0;
};

// Precomputed Bellman backup machinery. Three execution paths:
//  * deterministic-fresh deliveries (p_m == 1): exact for any m, demand is the
//    only randomness;
//  * m == 3: delivery enters next-state and cost only through the pooled
//    coordinates (x1+y1, x2+y2, y3), so the demand expectation is shared
//    across states and order sizes through one table per sweep;
//  * generic enumeration over stored delivery compositions (small instances
//    and oracle checks).
class BellmanEngine {
  public:
    enum class Kind { DeterministicFresh, PooledM3, Generic };

    explicit BellmanEngine(const Problem& problem) : p_(problem) {
        p_.validate();
        grid_ = StateGrid{p_.m(), p_.x_cap, p_.period()};
        probs_.resize(p_.max_order + 1);
        bool deterministic = true;
        for (int z = 0; z <= p_.max_order; ++z) {
            probs_[z] = p_.shelf.probabilities(z);
            if (probs_[z][p_.m() - 1] < 1.0) deterministic = false;
        }
        if (deterministic)
            kind_ = Kind::DeterministicFresh;
        else if (p_.m() == 3)
            kind_ = Kind::PooledM3;
        else
            kind_ = Kind::Generic;
        if (kind_ != Kind::DeterministicFresh) build_compositions();
    }

    const StateGrid& grid() const { return grid_; }
    Kind kind() const { return kind_; }

    // One Bellman backup of layer `tau` given next-layer values. When
    // `fixed_policy` is non-empty only that action is evaluated (policy
    // evaluation); otherwise the min over all order sizes is taken and, when
    // `out_action` is non-empty, the smallest minimizer is recorded.
    void backup_layer(int tau, std::span<const double> v_next, std::span<double> out_v,
                      std::span<int> out_action, std::span<const int> fixed_policy,
                      int workers) const {
        switch (kind_) {
            case Kind::DeterministicFresh:
                backup_deterministic(tau, v_next, out_v, out_action, fixed_policy, workers);
                break;
            case Kind::PooledM3:
                backup_m3(tau, v_next, out_v, out_action, fixed_policy, workers);
                break;
            case Kind::Generic:
                backup_generic(tau, v_next, out_v, out_action, fixed_policy, workers);
                break;
        }
    }

  private:
    // ---- shared precomputation helpers -------------------------------------

    // G[c] = E_d[ holding*(c-d)^+ + shortage*(d-c)^+ ] for post-order stock c.
    std::vector<double> stock_cost_table(int tau, int max_c) const {
        std::vector<double> g(max_c + 1, 0.0);
        const auto pmf = p_.demand.pmf_row(tau);
        for (int c = 0; c <= max_c; ++c) {
            double acc = 0.0;
            for (int d = 0; d <= p_.demand.truncation(); ++d) {
                const int over = c - d;
                acc += pmf[d] * (over >= 0 ? p_.costs.holding * over : -p_.costs.shortage * over);
            }
            g[c] = acc;
        }
        return g;
    }

    // W[a] = E_d[ (a-d)^+ ] for oldest-age stock a (wastage expectation).
    std::vector<double> leftover_table(int tau, int max_a) const {
        std::vector<double> w(max_a + 1, 0.0);
        const auto pmf = p_.demand.pmf_row(tau);
        const int dmax = p_.demand.truncation();
        for (int a = 0; a <= max_a; ++a) {
            double acc = 0.0;
            for (int d = 0; d <= std::min(a - 1, dmax); ++d) acc += pmf[d] * (a - d);
            w[a] = acc;
        }
        return w;
    }

    void build_compositions() {
        support_.resize(p_.max_order + 1);
        for (int z = 0; z <= p_.max_order; ++z) {
            auto& list = support_[z];
            for_each_composition(z, p_.m(), [&](const DeliveryVector& y) {
                const double w = p_.shelf.delivery_pmf(z, y);
                if (w <= 0.0) return;
                CompositionEntry e;
                for (int k = 0; k < p_.m(); ++k) e.y[k] = y.count[k];
                e.weight = w;
                list.push_back(e);
            });
        }
    }

    // ---- deterministic-fresh path ------------------------------------------

    void backup_deterministic(int tau, std::span<const double> v_next, std::span<double> out_v,
                              std::span<int> out_action, std::span<const int> fixed_policy,
                              int workers) const {
        const int cap = p_.x_cap;
        const int m = p_.m();
        const int dim = m - 1;
        const int zmax = p_.max_order;
        const int dmax = p_.demand.truncation();
        const auto pmf = p_.demand.pmf_row(tau);
        const auto g_cost = stock_cost_table(tau, dim * cap + zmax);
        const auto w_cost = leftover_table(tau, cap);
        const std::size_t fresh_stride = grid_.per_tau() / (cap + 1);

        const std::size_t n_states = grid_.per_tau();
        const std::size_t chunk = 1024;
        const std::size_t n_chunks = (n_states + chunk - 1) / chunk;
        parallel_for(n_chunks, workers, [&](std::size_t ci) {
            std::vector<int> x(dim);
            std::vector<std::size_t> base_idx(dmax + 1);
            std::vector<int> spill(dmax + 1);
            const std::size_t lo = ci * chunk, hi = std::min(n_states, lo + chunk);
            for (std::size_t idx = lo; idx < hi; ++idx) {
                grid_.decode(idx, x);
                const int total = std::accumulate(x.begin(), x.end(), 0);
                // Aging of carried stock does not depend on the (all-fresh)
                // delivery, so precompute it per demand value.
                for (int d = 0; d <= dmax; ++d) {
                    std::size_t bi = 0;
                    std::size_t stride = 1;
                    int cum = x[0];
                    for (int j = 1; j <= dim - 1; ++j) {
                        const int left = positive_part(x[j] - positive_part(d - cum));
                        bi += static_cast<std::size_t>(left) * stride;
                        stride *= static_cast<std::size_t>(cap + 1);
                        cum += x[j];
                    }
                    base_idx[d] = bi;
                    spill[d] = positive_part(d - total);
                }
                const double base_waste = p_.costs.wastage * w_cost[x[0]];
                double best = std::numeric_limits<double>::infinity();
                int best_z = 0;
                const int z_lo = fixed_policy.empty() ? 0 : fixed_policy[idx];
                const int z_hi = fixed_policy.empty() ? zmax : fixed_policy[idx];
                for (int z = z_lo; z <= z_hi; ++z) {
                    double q = (z > 0 ? p_.costs.fixed : 0.0) + g_cost[total + z] + base_waste;
                    double cont = 0.0;
                    for (int d = 0; d <= dmax; ++d) {
                        const int fresh = std::min(positive_part(z - spill[d]), cap);
                        cont += pmf[d] * v_next[base_idx[d] +
                                                static_cast<std::size_t>(fresh) * fresh_stride];
                    }
                    q += p_.costs.discount * cont;
                    if (q < best) {
                        best = q;
                        best_z = z;
                    }
                }
                out_v[idx] = best;
                if (!out_action.empty()) out_action[idx] = best_z;
            }
        });
    }

    // ---- pooled m == 3 path -------------------------------------------------

    void backup_m3(int tau, std::span<const double> v_next, std::span<double> out_v,
                   std::span<int> out_action, std::span<const int> fixed_policy,
                   int workers) const {
        const int cap = p_.x_cap;
        const int zmax = p_.max_order;
        const int dmax = p_.demand.truncation();
        const auto pmf = p_.demand.pmf_row(tau);
        const int amax = cap + zmax;  // pooled age-1 or age-2 stock bound
        const auto g_cost = stock_cost_table(tau, 2 * cap + zmax);
        const auto w_cost = leftover_table(tau, amax);

        // U[(a*(amax+1) + b)*(zmax+1) + y3] = E_d v_next(next(a, b, y3, d))
        const std::size_t ab = static_cast<std::size_t>(amax + 1);
        std::vector<double> u(ab * ab * static_cast<std::size_t>(zmax + 1));
        parallel_for(ab, workers, [&](std::size_t ai) {
            const int a = static_cast<int>(ai);
            for (int b = 0; b <= amax; ++b) {
                double* row = &u[(ai * ab + static_cast<std::size_t>(b)) * (zmax + 1)];
                for (int y3 = 0; y3 <= zmax; ++y3) {
                    double acc = 0.0;
                    for (int d = 0; d <= dmax; ++d) {
                        const int x1n = std::min(positive_part(b - positive_part(d - a)), cap);
                        const int x2n =
                            std::min(positive_part(y3 - positive_part(d - a - b)), cap);
                        acc += pmf[d] * v_next[static_cast<std::size_t>(x2n) * (cap + 1) + x1n];
                    }
                    row[y3] = acc;
                }
            }
        });

        const double alpha = p_.costs.discount;
        const double theta = p_.costs.wastage;
        parallel_for(static_cast<std::size_t>(cap + 1), workers, [&](std::size_t x2i) {
            const int x2 = static_cast<int>(x2i);
            for (int x1 = 0; x1 <= cap; ++x1) {
                const std::size_t idx = x2i * (cap + 1) + static_cast<std::size_t>(x1);
                const int total = x1 + x2;
                double best = std::numeric_limits<double>::infinity();
                int best_z = 0;
                const int z_lo = fixed_policy.empty() ? 0 : fixed_policy[idx];
                const int z_hi = fixed_policy.empty() ? zmax : fixed_policy[idx];
                for (int z = z_lo; z <= z_hi; ++z) {
                    double q = (z > 0 ? p_.costs.fixed : 0.0) + g_cost[total + z];
                    double acc = 0.0;
                    for (const auto& e : support_[z]) {
                        const int a = x1 + e.y[0];
                        const int b = x2 + e.y[1];
                        acc += e.weight *
                               (theta * w_cost[a] +
                                alpha * u[(static_cast<std::size_t>(a) * ab + b) * (zmax + 1) +
                                          e.y[2]]);
                    }
                    q += acc;
                    if (q < best) {
                        best = q;
                        best_z = z;
                    }
                }
                out_v[idx] = best;
                if (!out_action.empty()) out_action[idx] = best_z;
            }
        });
    }

    // ---- generic enumeration path -------------------------------------------

    void backup_generic(int tau, std::span<const double> v_next, std::span<double> out_v,
                        std::span<int> out_action, std::span<const int> fixed_policy,
                        int workers) const {
        const int cap = p_.x_cap;
        const int m = p_.m();
        const int dim = m - 1;
        const int zmax = p_.max_order;
        const int dmax = p_.demand.truncation();
        const auto pmf = p_.demand.pmf_row(tau);
        const double alpha = p_.costs.discount;

        const std::size_t n_states = grid_.per_tau();
        const std::size_t chunk = 64;
        const std::size_t n_chunks = (n_states + chunk - 1) / chunk;
        parallel_for(n_chunks, workers, [&](std::size_t ci) {
            std::vector<int> x(dim), next(dim);
            const std::size_t lo = ci * chunk, hi = std::min(n_states, lo + chunk);
            for (std::size_t idx = lo; idx < hi; ++idx) {
                grid_.decode(idx, x);
                const int total = std::accumulate(x.begin(), x.end(), 0);
                double best = std::numeric_limits<double>::infinity();
                int best_z = 0;
                const int z_lo = fixed_policy.empty() ? 0 : fixed_policy[idx];
                const int z_hi = fixed_policy.empty() ? zmax : fixed_policy[idx];
                for (int z = z_lo; z <= z_hi; ++z) {
                    double q = z > 0 ? p_.costs.fixed : 0.0;
                    for (const auto& e : support_[z]) {
                        const std::span<const int> delivery(e.y.data(), m);
                        double inner = 0.0;
                        for (int d = 0; d <= dmax; ++d) {
                            transition_raw(x, delivery, d, cap, next);
                            const int over = total + z - d;
                            double c = over >= 0 ? p_.costs.holding * over
                                                 : -p_.costs.shortage * over;
                            c += p_.costs.wastage * positive_part(x[0] + e.y[0] - d);
                            inner += pmf[d] * (c + alpha * v_next[grid_.encode(next)]);
                        }
                        q += e.weight * inner;
                    }
                    if (q < best) {
                        best = q;
                        best_z = z;
                    }
                }
                out_v[idx] = best;
                if (!out_action.empty()) out_action[idx] = best_z;
            }
        });
    }

    Problem p_;
    StateGrid grid_;
    Kind kind_;
    std::vector<std::vector<double>> probs_;
    std::vector<std::vector<CompositionEntry>> support_;
};

inline void check_state_space(const Problem& problem, const SolveOptions& opts,
                              BellmanEngine::Kind kind) {
    if (opts.allow_large_state_space) return;
    const bool ok = problem.m() <= 3 ||
                    (kind == BellmanEngine::Kind::DeterministicFresh && problem.m() <= 5);
    if (!ok)
        throw std::invalid_argument(
            "exact solve guarded to m <= 3 (m <= 5 deterministic); "
            "set allow_large_state_space to override");
}

}  // namespace detail

struct DpSolution {
    ValueTable values;
    PolicyTable policy;
};

// Extract the greedy policy (smallest minimizer) from a converged table.
inline PolicyTable extract_greedy_policy(const Problem& problem, const ValueTable& values,
                                         int workers = 1) {
    detail::BellmanEngine engine(problem);
    PolicyTable policy{values.grid, {}};
    policy.action.assign(values.grid.period, std::vector<int>(values.grid.per_tau(), 0));
    std::vector<double> scratch(values.grid.per_tau());
    for (int tau = values.grid.period - 1; tau >= 0; --tau) {
        const int next_tau = (tau + 1) % values.grid.period;
        engine.backup_layer(tau, values.v[next_tau], scratch, policy.action[tau], {}, workers);
    }
    return policy;
}

// Value iteration to the requested sup-norm residual. Layers are refreshed in
// reverse time order within a sweep (values for time index tau use the values
// just computed for tau+1), which contracts roughly alpha^period per sweep
// while staying deterministic and worker-count independent: parallelism is
// only across states inside one layer.
inline DpSolution value_iteration(const Problem& problem, const SolveOptions& opts = {}) {
    detail::BellmanEngine engine(problem);
    detail::check_state_space(problem, opts, engine.kind());
    const StateGrid grid = engine.grid();

    ValueTable values{grid, {}, 0.0, 0};
    values.v.assign(grid.period, std::vector<double>(grid.per_tau(), 0.0));
    std::vector<double> fresh(grid.per_tau());

    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.max_iters && residual > opts.tol; ++iter) {
        residual = 0.0;
        for (int tau = grid.period - 1; tau >= 0; --tau) {
            const int next_tau = (tau + 1) % grid.period;
            engine.backup_layer(tau, values.v[next_tau], fresh, {}, {}, opts.workers);
            double layer_res = 0.0;
            auto& cur = values.v[tau];
            for (std::size_t i = 0; i < cur.size(); ++i)
                layer_res = std::max(layer_res, std::abs(fresh[i] - cur[i]));
            residual = std::max(residual, layer_res);
            cur.swap(fresh);
        }
    }
    values.residual = residual;
    values.iterations = iter;
    if (residual > opts.tol)
        throw ConvergenceError("value iteration did not reach tolerance " +
                                   format_double(opts.tol) + " in " + std::to_string(iter) +
                                   " sweeps (residual " + format_double(residual) + ")",
                               residual);

    DpSolution solution{std::move(values), {}};
    solution.policy = extract_greedy_policy(problem, solution.values, opts.workers);
    return solution;
}

// Value of the nonperishable companion problem over total inventory: lost
// sales, costs (fixed, holding, shortage), the same demand and discount, no
// expiry. Used as a basis feature by the value approximation.
struct ScalarValueTable {
    int s_cap = 0;
    int period = 0;
    std::vector<std::vector<double>> v;     // v[tau][s]
    std::vector<std::vector<int>> action;   // greedy order size
    double residual = 0.0;
    int iterations = 0;

    double at(int tau, int total) const {
        return v[tau][std::min(std::max(total, 0), s_cap)];
    }
};

inline ScalarValueTable nonperishable_value(const Problem& problem, const SolveOptions& opts = {}) {
    const int s_cap = (problem.m() - 1) * problem.x_cap + problem.max_order;
    const int period = problem.period();
    const int zmax = problem.max_order;
    const int dmax = problem.demand.truncation();
    const double alpha = problem.costs.discount;

    ScalarValueTable table;
    table.s_cap = s_cap;
    table.period = period;
    table.v.assign(period, std::vector<double>(s_cap + 1, 0.0));
    table.action.assign(period, std::vector<int>(s_cap + 1, 0));

    std::vector<double> fresh(s_cap + 1);
    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.max_iters && residual > opts.tol; ++iter) {
        residual = 0.0;
        for (int tau = period - 1; tau >= 0; --tau) {
            const auto pmf = problem.demand.pmf_row(tau);
            const auto& v_next = table.v[(tau + 1) % period];
            for (int s = 0; s <= s_cap; ++s) {
                double best = std::numeric_limits<double>::infinity();
                int best_z = 0;
                for (int z = 0; z <= zmax; ++z) {
                    double q = z > 0 ? problem.costs.fixed : 0.0;
                    for (int d = 0; d <= dmax; ++d) {
                        const int over = s + z - d;
                        const double c = over >= 0 ? problem.costs.holding * over
                                                   : -problem.costs.shortage * over;
                        q += pmf[d] * (c + alpha * v_next[std::min(positive_part(over), s_cap)]);
                    }
                    if (q < best) {
                        best = q;
                        best_z = z;
                    }
                }
                fresh[s] = best;
                table.action[tau][s] = best_z;
            }
            for (int s = 0; s <= s_cap; ++s)
                residual = std::max(residual, std::abs(fresh[s] - table.v[tau][s]));
            table.v[tau].swap(fresh);
        }
    }
    table.residual = residual;
    table.iterations = iter;
    if (residual > opts.tol)
        throw ConvergenceError("nonperishable value iteration did not converge", residual);
    return table;
}

// Exact discounted value of a fixed policy (same sweep scheme, no min).
inline ValueTable policy_value(const Problem& problem, const PolicyTable& policy,
                               const SolveOptions& opts = {}) {
    detail::BellmanEngine engine(problem);
    detail::check_state_space(problem, opts, engine.kind());
    const StateGrid grid = engine.grid();
    if (!(policy.grid == grid)) throw std::invalid_argument("policy grid mismatch");

    ValueTable values{grid, {}, 0.0, 0};
    values.v.assign(grid.period, std::vector<double>(grid.per_tau(), 0.0));
    std::vector<double> fresh(grid.per_tau());

    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.max_iters && residual > opts.tol; ++iter) {
        residual = 0.0;
        for (int tau = grid.period - 1; tau >= 0; --tau) {
            const int next_tau = (tau + 1) % grid.period;
            engine.backup_layer(tau, values.v[next_tau], fresh, {}, policy.action[tau],
                                opts.workers);
            double layer_res = 0.0;
            auto& cur = values.v[tau];
            for (std::size_t i = 0; i < cur.size(); ++i)
                layer_res = std::max(layer_res, std::abs(fresh[i] - cur[i]));
            residual = std::max(residual, layer_res);
            cur.swap(fresh);
        }
    }
    values.residual = residual;
    values.iterations = iter;
    if (residual > opts.tol)
        throw ConvergenceError("policy evaluation did not converge", residual);
    return values;
}

}  // namespace padp
