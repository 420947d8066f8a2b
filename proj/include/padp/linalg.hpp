#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace padp {

struct LeastSquaresResult {
    std::vector<double> coefficients;
    bool rank_deficient = false;
    int rank = 0;
};

// Dense column-major matrix, sized for small regression problems
// (thousands of rows, tens of columns).
class ColMatrix {
  public:
    ColMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
    std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

  private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace detail

inline double detail_norm(std::span<const double> a) { return detail::dot(a, a); }

// Minimum-norm least squares via one-sided Jacobi SVD. The factorization is
// fully orthogonal, so ill-conditioned feature matrices (value-function
// features next to raw polynomials) are handled without forming A^T A.
// Columns are equilibrated to unit norm before the factorization and the
// result is unscaled afterward; directions with singular value below
// rcond * sigma_max (of the equilibrated matrix) are truncated, which yields
// the minimum-norm solution on the supported subspace and sets
// `rank_deficient`. Regression designs collected along one policy's
// trajectories are routinely near-collinear (the visited states span a
// narrow band), and without truncation the coefficients explode with massive
// cancellation; the truncated solution predicts the same values on the data
// band while staying bounded off it.
inline LeastSquaresResult solve_least_squares(ColMatrix a, std::span<const double> y,
                                              double rcond = 1e-6) {
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    if (y.size() != n) throw std::invalid_argument("solve_least_squares: size mismatch");

    std::vector<double> col_scale(k, 1.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double norm = std::sqrt(detail_norm(a.col(j)));
        if (norm > 0.0) {
            col_scale[j] = norm;
            for (double& v : a.col(j)) v /= norm;
        }
    }

    // V accumulates the right singular vectors (k x k, column-major).
    std::vector<double> v(k * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) v[j * k + j] = 1.0;

    const double tol = 1e-14;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                auto cp = a.col(p);
                auto cq = a.col(q);
                const double app = detail::dot(cp, cp);
                const double aqq = detail::dot(cq, cq);
                const double apq = detail::dot(cp, cq);
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double xp = cp[i], xq = cq[i];
                    cp[i] = cs * xp - sn * xq;
                    cq[i] = sn * xp + cs * xq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vp = v[p * k + i], vq = v[q * k + i];
                    v[p * k + i] = cs * vp - sn * vq;
                    v[q * k + i] = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(k, 0.0);
    double sigma_max = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        sigma[j] = std::sqrt(detail::dot(a.col(j), a.col(j)));
        sigma_max = std::max(sigma_max, sigma[j]);
    }
    const double cutoff = sigma_max * rcond;

    LeastSquaresResult result;
    result.coefficients.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        if (sigma[j] <= cutoff || sigma[j] == 0.0) {
            result.rank_deficient = true;
            continue;
        }
        ++result.rank;
        // coefficient along v_j: (u_j . y) / sigma_j with u_j = a_j / sigma_j
        const double uy = detail::dot(a.col(j), y) / sigma[j];
        const double scale = uy / sigma[j];
        for (std::size_t i = 0; i < k; ++i) result.coefficients[i] += scale * v[j * k + i];
    }
    for (std::size_t j = 0; j < k; ++j)
        if (col_scale[j] > 0.0) result.coefficients[j] /= col_scale[j];
    if (n < k) result.rank_deficient = true;
    return result;
}

}  // namespace padp
