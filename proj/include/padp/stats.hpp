#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace padp {

// Sample mean, standard error and a normal-approximation confidence interval.
// Accumulation is sequential in caller-supplied order to keep results
// reproducible.
struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::size_t count = 0;

    double stddev() const { return std::sqrt(variance); }
    double standard_error() const {
        return count > 1 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
    }
    // Half-width of the 95% normal CI.
    double ci_halfwidth() const { return 1.959963984540054 * standard_error(); }
};

inline SampleStats summarize(std::span<const double> values) {
    SampleStats s;
    s.count = values.size();
    if (s.count == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - s.mean;
            ss += d * d;
        }
        s.variance = ss / static_cast<double>(s.count - 1);
    }
    return s;
}

struct GapEstimate {
    double gap_pct = 0.0;
    double ci_halfwidth = 0.0;
};

// Relative gap 100*(cost - reference)/reference. When the reference itself is
// an estimate (lower bound), both uncertainties propagate first order.
inline GapEstimate relative_gap(double cost, double cost_ci, double reference,
                                double reference_ci = 0.0) {
    if (!(reference > 0.0)) throw std::domain_error("relative_gap: reference must be positive");
    GapEstimate g;
    g.gap_pct = 100.0 * (cost - reference) / reference;
    g.ci_halfwidth = 100.0 * (cost_ci + (cost / reference) * reference_ci) / reference;
    return g;
}

}  // namespace padp
