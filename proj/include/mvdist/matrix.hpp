#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mvdist {

// Dense row-major matrix. Dimensions here are small (the distribution
// dimension k), so no attempt is made at blocked or vectorized kernels.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

inline double max_abs(const Matrix& m) {
    double r = 0.0;
    for (double v : m.data()) r = std::max(r, std::abs(v));
    return r;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r = std::max(r, std::abs(a(i, j) - b(i, j)));
    return r;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

enum class FactorizationMethod { Cholesky, Eigen, Svd };

// A square root R of sigma: R * R^T reconstructs sigma.
struct MatrixFactor {
    Matrix entries;
    FactorizationMethod method;
};

// A Cholesky pivot (diagonal residual, in variance units) at or below this
// fraction of the largest diagonal entry is treated as a zero pivot, i.e. a
// degenerate matrix.
inline constexpr double kPdTolerance = 1e-10;

namespace detail {

inline double pd_pivot_floor(const Matrix& sigma) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < sigma.rows(); ++i) max_diag = std::max(max_diag, std::abs(sigma(i, i)));
    return kPdTolerance * max_diag;
}

}  // namespace detail

// Lower-triangular L with L * L^T = sigma. Pivots at or below the degeneracy
// floor raise NotPositiveDefinite.
inline Matrix cholesky_lower(const Matrix& sigma) {
    const std::size_t k = sigma.rows();
    const double floor = detail::pd_pivot_floor(sigma);
    Matrix l(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        double pivot = sigma(j, j);
        for (std::size_t m = 0; m < j; ++m) pivot -= l(j, m) * l(j, m);
        if (!(pivot > floor))
            throw NotPositiveDefinite("cholesky pivot " + std::to_string(pivot) + " at column " +
                                      std::to_string(j) + " is not positive");
        l(j, j) = std::sqrt(pivot);
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = sigma(i, j);
            for (std::size_t m = 0; m < j; ++m) s -= l(i, m) * l(j, m);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

// Solves L y = v for lower-triangular L.
inline std::vector<double> forward_solve(const Matrix& l, const std::vector<double>& v) {
    const std::size_t k = l.rows();
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        double s = v[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * y[j];
        y[i] = s / l(i, i);
    }
    return y;
}

namespace detail {

// Cyclic Jacobi rotations for a symmetric matrix. Returns eigenvalues in
// descending order with matching eigenvector columns. Convergence: every
// off-diagonal magnitude below 1e-12 times the Frobenius norm of the input,
// at most 100 sweeps.
inline std::pair<std::vector<double>, Matrix> jacobi_eigen(const Matrix& sym) {
    const std::size_t k = sym.rows();
    Matrix a = sym;
    Matrix v = Matrix::identity(k);
    const double threshold = 1e-12 * frobenius_norm(sym);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= threshold) break;

        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    auto argmax_component = [&](std::size_t col) {
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double mag = std::abs(v(i, col));
            if (mag > best_mag) {
                best_mag = mag;
                best = i;
            }
        }
        return best;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
        return argmax_component(x) < argmax_component(y);
    });

    std::vector<double> values(k);
    Matrix vectors(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < k; ++i) vectors(i, j) = v(i, order[j]);
    }
    return {values, vectors};
}

}  // namespace detail

// R with R * R^T = sigma. Eigen returns V * diag(sqrt(lambda)); Svd takes the
// same path (the two factorizations coincide for symmetric positive-definite
// input) but is kept as a distinct method so callers can request it by name.
inline MatrixFactor matrix_sqrt(const Matrix& sigma, FactorizationMethod method) {
    switch (method) {
        case FactorizationMethod::Cholesky:
            return {cholesky_lower(sigma), method};
        case FactorizationMethod::Eigen:
        case FactorizationMethod::Svd: {
            auto [values, vectors] = detail::jacobi_eigen(sigma);
            const double floor = detail::pd_pivot_floor(sigma);
            const std::size_t k = sigma.rows();
            Matrix r(k, k);
            for (std::size_t j = 0; j < k; ++j) {
                if (!(values[j] > floor))
                    throw NotPositiveDefinite("eigenvalue " + std::to_string(values[j]) +
                                              " is not positive");
                const double s = std::sqrt(values[j]);
                for (std::size_t i = 0; i < k; ++i) r(i, j) = vectors(i, j) * s;
            }
            return {r, method};
        }
    }
    throw UnknownMethod("unknown factorization method");
}

}  // namespace mvdist
