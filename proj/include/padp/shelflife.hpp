#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace padp {

// Units received in one delivery, bucketed by remaining shelf-life.
// count[k-1] = number of units that expire after k more periods.
struct DeliveryVector {
    std::vector<int> count;

    explicit DeliveryVector(int m = 0) : count(m, 0) {}
    int total() const { return std::accumulate(count.begin(), count.end(), 0); }
    int& at_life(int k) { return count[k - 1]; }
    int at_life(int k) const { return count[k - 1]; }
    bool operator==(const DeliveryVector&) const = default;
};

// Multinomial-logit model of the remaining shelf-life of delivered units.
// Category 1 (oldest) is the reference: for k >= 2 the log-odds of receiving
// a unit with remaining life k versus 1 is intercept[k-2] + slope[k-2] * z,
// where z is the order size. Each unit in an order of size z independently
// falls in category k with probability p_k(z), so a delivery is Multinomial.
//
// Immutable and stateless; all randomness comes in as uniforms.
class ShelfLifeModel {
  public:
    ShelfLifeModel() : m_(1) {}  // single-category placeholder

    ShelfLifeModel(int m, std::vector<double> intercepts, std::vector<double> slopes)
        : m_(m), c0_(std::move(intercepts)), c1_(std::move(slopes)) {
        if (m_ < 1) throw std::invalid_argument("shelflife: m must be >= 1");
        if (c0_.size() != static_cast<std::size_t>(m_ - 1) || c1_.size() != c0_.size())
            throw std::invalid_argument("shelflife: need m-1 intercepts and slopes");
    }

    // Exogenous model with fixed category probabilities (independent of z).
    static ShelfLifeModel from_probabilities(std::span<const double> p) {
        const int m = static_cast<int>(p.size());
        if (m < 1) throw std::invalid_argument("shelflife: empty probability vector");
        for (double v : p)
            if (!(v > 0.0)) throw std::invalid_argument("shelflife: probabilities must be positive");
        std::vector<double> c0(m - 1), c1(m - 1, 0.0);
        for (int k = 2; k <= m; ++k) c0[k - 2] = std::log(p[k - 1] / p[0]);
        return ShelfLifeModel(m, std::move(c0), std::move(c1));
    }

    // All delivered units fresh: p_m(z) = 1.
    static ShelfLifeModel deterministic_fresh(int m) {
        std::vector<double> c0(m - 1, 0.0), c1(m - 1, 0.0);
        if (m > 1) c0[m - 2] = 745.0;  // exp() saturates; max-subtraction keeps this finite
        return ShelfLifeModel(m, std::move(c0), std::move(c1));
    }

    int max_shelf_life() const { return m_; }
    std::span<const double> intercepts() const { return c0_; }
    std::span<const double> slopes() const { return c1_; }
    bool is_exogenous() const {
        return std::all_of(c1_.begin(), c1_.end(), [](double s) { return s == 0.0; });
    }

    // Category probabilities (p_1(z), ..., p_m(z)). The max linear predictor is
    // subtracted before exponentiation; slopes times z = 100 would otherwise
    // overflow.
    std::vector<double> probabilities(int z) const {
        if (z < 0) throw std::domain_error("shelflife: negative order size");
        std::vector<double> eta(m_, 0.0);  // eta[0] = 0 is the reference category
        for (int k = 2; k <= m_; ++k) eta[k - 1] = c0_[k - 2] + c1_[k - 2] * z;
        const double eta_max = *std::max_element(eta.begin(), eta.end());
        double denom = 0.0;
        std::vector<double> p(m_);
        for (int k = 0; k < m_; ++k) {
            p[k] = std::exp(eta[k] - eta_max);
            denom += p[k];
        }
        for (double& v : p) v /= denom;
        return p;
    }

    // Multinomial probability of one particular delivery composition.
    double delivery_pmf(int z, const DeliveryVector& y) const {
        if (static_cast<int>(y.count.size()) != m_)
            throw std::invalid_argument("delivery_pmf: wrong category count");
        if (y.total() != z) throw std::domain_error("delivery_pmf: counts must sum to order size");
        if (z == 0) return 1.0;
        const auto p = probabilities(z);
        double logp = std::lgamma(z + 1.0);
        for (int k = 0; k < m_; ++k) {
            if (y.count[k] < 0) throw std::domain_error("delivery_pmf: negative count");
            if (y.count[k] == 0) continue;
            if (p[k] == 0.0) return 0.0;
            logp += y.count[k] * std::log(p[k]) - std::lgamma(y.count[k] + 1.0);
        }
        return std::exp(logp);
    }

    // Invert the first z uniforms against probabilities(z), one unit each.
    // Categories are scanned freshest-first (k = m down to 1), so replays are
    // bit-identical and two order sizes sharing a uniform block agree on every
    // shared unit up to the probability shift between p(z) and p(z').
    DeliveryVector sample_delivery(int z, std::span<const double> uniforms) const {
        if (z < 0) throw std::domain_error("sample_delivery: negative order size");
        if (static_cast<int>(uniforms.size()) < z)
            throw std::domain_error("sample_delivery: fewer uniforms than units");
        DeliveryVector y(m_);
        if (z == 0) return y;
        const auto p = probabilities(z);
        std::vector<double> cum(m_);  // cum[i] = P(category >= m - i), freshest-first
        double acc = 0.0;
        for (int i = 0; i < m_; ++i) {
            acc += p[m_ - 1 - i];
            cum[i] = acc;
        }
        cum[m_ - 1] = 1.0;
        for (int unit = 0; unit < z; ++unit) {
            const double u = uniforms[unit];
            int i = 0;
            while (cum[i] <= u) ++i;
            ++y.count[m_ - 1 - i];
        }
        return y;
    }

  private:
    int m_;
    std::vector<double> c0_, c1_;
};

// Visit every composition of z units into m categories, oldest-first
// lexicographic order. Used by exact expectations and enumeration oracles.
inline void for_each_composition(int z, int m, const std::function<void(const DeliveryVector&)>& fn) {
    DeliveryVector y(m);
    std::function<void(int, int)> rec = [&](int k, int remaining) {
        if (k == m - 1) {
            y.count[k] = remaining;
            fn(y);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            y.count[k] = c;
            rec(k + 1, remaining - c);
        }
    };
    rec(0, z);
}

inline std::size_t composition_count(int z, int m) {
    // C(z + m - 1, m - 1)
    double v = 1.0;
    for (int i = 1; i <= m - 1; ++i) v *= static_cast<double>(z + i) / i;
    return static_cast<std::size_t>(std::llround(v));
}

}  // namespace padp
