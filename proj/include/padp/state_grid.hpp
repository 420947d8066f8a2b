#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace padp {

// Linear indexing of the truncated inventory grid. Each of the m-1 age
// buckets ranges over {0..cap}; bucket 0 (remaining life 1) is the
// fastest-varying coordinate.
struct StateGrid {
    int m = 3;
    int cap = 20;
    int period = 7;

    int dim() const { return m - 1; }
    std::size_t per_tau() const {
        std::size_t p = 1;
        for (int i = 0; i < dim(); ++i) p *= static_cast<std::size_t>(cap + 1);
        return p;
    }
    std::size_t total_states() const { return per_tau() * static_cast<std::size_t>(period); }

    std::size_t encode(std::span<const int> x) const {
        std::size_t idx = 0, stride = 1;
        for (int i = 0; i < dim(); ++i) {
            idx += static_cast<std::size_t>(x[i]) * stride;
            stride *= static_cast<std::size_t>(cap + 1);
        }
        return idx;
    }

    void decode(std::size_t idx, std::span<int> x) const {
        for (int i = 0; i < dim(); ++i) {
            x[i] = static_cast<int>(idx % static_cast<std::size_t>(cap + 1));
            idx /= static_cast<std::size_t>(cap + 1);
        }
    }

    std::vector<int> decode(std::size_t idx) const {
        std::vector<int> x(dim());
        decode(idx, x);
        return x;
    }

    bool contains(std::span<const int> x) const {
        if (static_cast<int>(x.size()) != dim()) return false;
        for (int v : x)
            if (v < 0 || v > cap) return false;
        return true;
    }

    bool operator==(const StateGrid&) const = default;
};

}  // namespace padp
