#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace padp {

// splitmix64, used to expand seeds into full engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mix an arbitrary list of keys into one 64-bit stream id. Used to derive
// independent substreams per (seed, purpose, iteration, replication) so that
// results do not depend on scheduling or worker count.
inline std::uint64_t mix_stream_key(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t acc = 0x243f6a8885a308d3ULL;
    for (std::uint64_t k : keys) {
        acc ^= k + 0x9e3779b97f4a7c15ULL + (acc << 6) + (acc >> 2);
        acc = splitmix64(acc);
    }
    return acc;
}

// xoshiro256** by Blackman & Vigna. Deterministic across platforms, cheap to
// seed, and each instance is an independent stream when seeded via splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in {lo, ..., hi} by rejection-free scaling (bias is
    // negligible for the small ranges used here).
    int next_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    void fill_u01(std::span<double> out) {
        for (double& u : out) u = next_u01();
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

// Named purposes keep substream derivation collision-free and self-documenting.
enum class StreamPurpose : std::uint64_t {
    TrajectoryOutcome = 1,  // realized demand + delivery uniforms per period
    PolicySampling = 2,     // Monte-Carlo blocks consumed inside greedy search
    InitialState = 3,       // random start states for ADP replications
    Horizon = 4,            // geometric horizon draws for the lower bound
    Revealed = 5,           // revealed shelf-life blocks for the lower bound
    Evaluation = 6,         // policy evaluation replications
    Refit = 7,              // shelf-life data simulation for exogenous refits
};

inline Rng make_stream(std::uint64_t seed, StreamPurpose purpose,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(mix_stream_key({seed, static_cast<std::uint64_t>(purpose), a, b}));
}

}  // namespace padp
