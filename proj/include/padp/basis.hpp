#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padp/exact_dp.hpp"

namespace padp {

// Feature sets for the value approximation. Every choice starts with the
// constant and the nonperishable companion value at the total inventory;
// the remaining terms are per-age polynomials of increasing richness:
//   choice 1: x_j            choice 2: x_j, x_j^2
//   choice 3: x_j, x_j^2, x_j^3
//   choice 4: x_j, x_j^2 plus all pairwise products x_j x_k
// Per-age blocks run from the freshest bucket (j = m-1) down to the oldest;
// choice-4 interactions are appended after the blocks, pairs (j, k), j > k,
// in the same descending order.
struct BasisSpec {
    int choice = 2;
    int m = 3;

    void validate() const {
        if (choice < 1 || choice > 4) throw std::invalid_argument("basis choice must be in 1..4");
        if (m < 2) throw std::invalid_argument("basis needs m >= 2");
    }

    int feature_count() const {
        const int ages = m - 1;
        switch (choice) {
            case 1: return 2 + ages;
            case 2: return 2 + 2 * ages;
            case 3: return 2 + 3 * ages;
            case 4: return 2 + 2 * ages + ages * (ages - 1) / 2;
            default: throw std::invalid_argument("basis choice must be in 1..4");
        }
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names{"1", "v1(total)"};
        const int ages = m - 1;
        for (int j = ages; j >= 1; --j) {
            const std::string xj = "x" + std::to_string(j);
            names.push_back(xj);
            if (choice >= 2) names.push_back(xj + "^2");
            if (choice == 3) names.push_back(xj + "^3");
        }
        if (choice == 4)
            for (int j = ages; j >= 1; --j)
                for (int k = j - 1; k >= 1; --k)
                    names.push_back("x" + std::to_string(j) + "*x" + std::to_string(k));
        return names;
    }

    // Writes feature_count() values. `v1` supplies the nonperishable value.
    void features(const ScalarValueTable& v1, int tau, std::span<const int> x,
                  std::span<double> out) const {
        int total = 0;
        for (int v : x) total += v;
        out[0] = 1.0;
        out[1] = v1.at(tau, total);
        std::size_t pos = 2;
        const int ages = m - 1;
        for (int j = ages; j >= 1; --j) {
            const double xj = static_cast<double>(x[j - 1]);
            out[pos++] = xj;
            if (choice >= 2) out[pos++] = xj * xj;
            if (choice == 3) out[pos++] = xj * xj * xj;
        }
        if (choice == 4)
            for (int j = ages; j >= 1; --j)
                for (int k = j - 1; k >= 1; --k)
                    out[pos++] = static_cast<double>(x[j - 1]) * static_cast<double>(x[k - 1]);
    }
};

// Per-period coefficient vectors over a basis, together with the shared
// nonperishable value table the second feature reads from.
struct ValueApprox {
    BasisSpec spec;
    int period = 7;
    std::vector<std::vector<double>> beta;  // beta[tau], length feature_count()
    std::shared_ptr<const ScalarValueTable> v1;

    static ValueApprox zeros(BasisSpec spec, int period,
                             std::shared_ptr<const ScalarValueTable> v1) {
        ValueApprox a;
        a.spec = spec;
        a.period = period;
        a.beta.assign(period, std::vector<double>(spec.feature_count(), 0.0));
        a.v1 = std::move(v1);
        return a;
    }

    double evaluate(int tau, std::span<const int> x, std::span<double> scratch) const {
        spec.features(*v1, tau, x, scratch);
        const auto& b = beta[tau];
        double acc = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) acc += b[i] * scratch[i];
        return acc;
    }

    double evaluate(int tau, std::span<const int> x) const {
        std::vector<double> scratch(spec.feature_count());
        return evaluate(tau, x, scratch);
    }
};

}  // namespace padp
