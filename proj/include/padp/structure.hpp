#pragma once

#include <span>
#include <string>
#include <vector>

#include "padp/exact_dp.hpp"
#include "padp/io.hpp"

namespace padp {

// One failure of the classical bounded-sensitivity chain
//   -1 <= D_{x_{m-1}} mu <= ... <= D_{x_1} mu <= 0
// where D_{x_i} mu is the change of the greedy order size when one unit of
// age-i stock is added. `ages` names the buckets involved (second entry -1
// for the two bound clauses).
struct SensitivityViolation {
    int tau = 0;
    std::vector<int> state;
    std::string clause;
    int age_a = 0, age_b = -1;
    int delta_a = 0, delta_b = 0;
};

// Scan the whole policy grid. Differences that would step outside the grid
// are skipped, so cap-boundary states cannot produce spurious witnesses.
inline std::vector<SensitivityViolation> find_sensitivity_violations(const PolicyTable& policy) {
    const StateGrid& grid = policy.grid;
    const int dim = grid.dim();
    std::vector<SensitivityViolation> out;
    std::vector<int> x(dim), xe(dim);
    std::vector<int> delta(dim);
    std::vector<bool> have(dim);
    for (int tau = 0; tau < grid.period; ++tau) {
        const auto& action = policy.action[tau];
        for (std::size_t idx = 0; idx < grid.per_tau(); ++idx) {
            grid.decode(idx, x);
            const int base = action[idx];
            for (int i = 0; i < dim; ++i) {
                have[i] = x[i] < grid.cap;
                if (!have[i]) continue;
                xe = x;
                ++xe[i];
                delta[i] = policy.at(tau, xe) - base;
            }
            auto add = [&](std::string clause, int age_a, int age_b, int da, int db) {
                out.push_back({tau, x, std::move(clause), age_a, age_b, da, db});
            };
            // lower bound on the freshest difference
            if (have[dim - 1] && delta[dim - 1] < -1)
                add("delta_x" + std::to_string(dim) + " < -1", dim, -1, delta[dim - 1], 0);
            // upper bound on the oldest difference
            if (have[0] && delta[0] > 0)
                add("delta_x1 > 0", 1, -1, delta[0], 0);
            // ordering between adjacent ages: fresher must decrease at least
            // as fast as older
            for (int i = 0; i + 1 < dim; ++i) {
                if (!have[i] || !have[i + 1]) continue;
                if (delta[i + 1] > delta[i])
                    add("delta_x" + std::to_string(i + 2) + " > delta_x" + std::to_string(i + 1),
                        i + 2, i + 1, delta[i + 1], delta[i]);
            }
        }
    }
    return out;
}

// Indices i with a strictly negative discrete second difference
// g(i+1) - 2 g(i) + g(i-1) < -tol, i.e. midpoint-convexity failures.
inline std::vector<int> find_nonconvexity_indices(std::span<const double> slice,
                                                  double tol = 1e-9) {
    std::vector<int> out;
    for (std::size_t i = 1; i + 1 < slice.size(); ++i) {
        const double second = slice[i + 1] - 2.0 * slice[i] + slice[i - 1];
        if (second < -tol) out.push_back(static_cast<int>(i));
    }
    return out;
}

// Values along one inventory axis with the other coordinates held at `base`.
inline std::vector<double> value_slice(const ValueTable& values, int tau, int axis,
                                       std::vector<int> base) {
    std::vector<double> out;
    out.reserve(values.grid.cap + 1);
    for (int v = 0; v <= values.grid.cap; ++v) {
        base[axis] = v;
        out.push_back(values.at(tau, base));
    }
    return out;
}

struct NonconvexityWitness {
    int tau = 0;
    std::string slice;  // description of the 1-D slice
    int index = 0;      // interior point that fails midpoint convexity
};

// Scan every axis-parallel value slice of the table.
inline std::vector<NonconvexityWitness> find_value_nonconvexities(const ValueTable& values,
                                                                  double tol = 1e-9) {
    const StateGrid& grid = values.grid;
    std::vector<NonconvexityWitness> out;
    std::vector<int> x(grid.dim());
    for (int tau = 0; tau < grid.period; ++tau) {
        for (int axis = 0; axis < grid.dim(); ++axis) {
            for (std::size_t idx = 0; idx < grid.per_tau(); ++idx) {
                grid.decode(idx, x);
                if (x[axis] != 0) continue;  // one scan per line
                const auto slice = value_slice(values, tau, axis, x);
                for (int i : find_nonconvexity_indices(slice, tol)) {
                    std::string desc = "v(tau=" + std::to_string(tau) + ", x) along x_" +
                                       std::to_string(axis + 1) + " at [";
                    for (int j = grid.dim() - 1; j >= 0; --j) {
                        desc += (j == axis ? std::string("*") : std::to_string(x[j]));
                        if (j > 0) desc += ",";
                    }
                    desc += "]";
                    out.push_back({tau, desc, i});
                }
            }
        }
    }
    return out;
}

// Exact one-step costs Q(tau, x, z) for all z; the expected-cost curve whose
// convexity in z is under study.
inline std::vector<double> exact_q_values(const Problem& problem, const ValueTable& values,
                                          const InventoryState& state) {
    std::vector<double> q(problem.max_order + 1, 0.0);
    const auto lookup = [&](int tau, std::span<const int> x) {
        return values.v[tau][values.grid.encode(x)];
    };
    for (int z = 0; z <= problem.max_order; ++z) {
        const auto val = expectation_over_outcomes(state, z, problem, lookup,
                                                   std::numeric_limits<std::size_t>::max());
        q[z] = *val;
    }
    return q;
}

// ---- flat CSV serialization (tau, x_{m-1}..x_1, value, action) -------------

inline void write_table_csv(const std::filesystem::path& path, const ValueTable& values,
                            const PolicyTable& policy) {
    const StateGrid& grid = values.grid;
    std::string out = "tau";
    for (int j = grid.dim(); j >= 1; --j) out += ",x" + std::to_string(j);
    out += ",value,action\n";
    std::vector<int> x(grid.dim());
    for (int tau = 0; tau < grid.period; ++tau) {
        for (std::size_t idx = 0; idx < grid.per_tau(); ++idx) {
            grid.decode(idx, x);
            out += std::to_string(tau);
            for (int j = grid.dim() - 1; j >= 0; --j) out += "," + std::to_string(x[j]);
            out += "," + format_double(values.v[tau][idx]);
            out += "," + std::to_string(policy.action[tau][idx]);
            out += "\n";
        }
    }
    write_text_file(path, out);
}

inline DpSolution read_table_csv(const std::filesystem::path& path, const StateGrid& grid) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty table file " + path.string());
    DpSolution sol;
    sol.values.grid = grid;
    sol.policy.grid = grid;
    sol.values.v.assign(grid.period, std::vector<double>(grid.per_tau(), 0.0));
    sol.policy.action.assign(grid.period, std::vector<int>(grid.per_tau(), 0));
    std::vector<int> x(grid.dim());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const auto cells = split(lines[li], ',');
        if (static_cast<int>(cells.size()) != grid.dim() + 3)
            throw std::runtime_error("bad row in " + path.string());
        const int tau = static_cast<int>(parse_long(cells[0]));
        for (int j = 0; j < grid.dim(); ++j)
            x[grid.dim() - 1 - j] = static_cast<int>(parse_long(cells[1 + j]));
        const std::size_t idx = grid.encode(x);
        sol.values.v.at(tau)[idx] = parse_double(cells[grid.dim() + 1]);
        sol.policy.action.at(tau)[idx] = static_cast<int>(parse_long(cells[grid.dim() + 2]));
    }
    return sol;
}

}  // namespace padp
