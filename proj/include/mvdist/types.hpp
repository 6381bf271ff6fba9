#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "extended_real.hpp"
#include "matrix.hpp"

namespace mvdist {

using LocationVector = std::vector<double>;

// Integration rectangle a_i <= x_i <= b_i with -inf <= a_i < b_i <= +inf.
struct ExtendedBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

// Support restriction l_i <= X_i <= u_i, l_i < u_i strictly. Whether the box
// carries positive probability is only checkable statistically, so it is
// verified lazily: the first normalizing-constant estimate must exceed its own
// error bound, otherwise DegenerateTruncation is raised.
struct TruncationBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct QmcConfig {
    int shifts = 12;
    int samples = 1000;
    double alpha = 3.0;
};

enum class Tail { Lower, Upper, Both };

struct BisectionConfig {
    long itermax = 1000000;
    double tolerance = 1e-6;
    Tail tail = Tail::Lower;
};

// value is clamped to [0,1]; error is alpha times the standard error of the
// per-shift means (0 when the result is exact, e.g. univariate reductions).
struct ProbabilityEstimate {
    double value = 0.0;
    double error = 0.0;
};

// flag: 0 converged, 1 iteration budget exhausted before the residual met the
// tolerance, 2 no sign change found in the maximal search bracket.
struct QuantileResult {
    double quantile = 0.0;
    double error = 0.0;
    int flag = 0;
    double fquantile = 0.0;
    long iterations = 0;
};

struct DistributionSpec {
    LocationVector delta;
    Matrix sigma;
    std::optional<double> nu;
    std::optional<TruncationBox> truncation;

    std::size_t dimension() const { return delta.size(); }
};

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* name) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidValue(std::string(name) + " must contain finite values only");
}

inline void require_no_nan(const std::vector<double>& v, const char* name) {
    for (double x : v)
        if (std::isnan(x)) throw InvalidValue(std::string(name) + " contains NaN");
}

}  // namespace detail

// Symmetry check: each entry pair must agree to 1e-12 relative. Asymmetric
// input is rejected rather than symmetrized.
inline void validate_scale_matrix(const Matrix& sigma, std::size_t k) {
    if (sigma.rows() != k || sigma.cols() != k)
        throw DimensionMismatch("sigma must be " + std::to_string(k) + "x" + std::to_string(k) +
                                ", got " + std::to_string(sigma.rows()) + "x" +
                                std::to_string(sigma.cols()));
    for (double v : sigma.data())
        if (!std::isfinite(v)) throw InvalidValue("sigma must contain finite values only");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double a = sigma(i, j), b = sigma(j, i);
            if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
                throw NotSymmetric("sigma(" + std::to_string(i) + "," + std::to_string(j) +
                                   ") != sigma(" + std::to_string(j) + "," + std::to_string(i) + ")");
        }
    cholesky_lower(sigma);  // positive-definiteness; throws NotPositiveDefinite
}

inline void validate_bounds(const ExtendedBounds& bounds, std::size_t k) {
    if (bounds.lower.size() != k || bounds.upper.size() != k)
        throw DimensionMismatch("bounds must have " + std::to_string(k) + " entries per side");
    detail::require_no_nan(bounds.lower, "lower");
    detail::require_no_nan(bounds.upper, "upper");
    for (std::size_t i = 0; i < k; ++i)
        if (!(bounds.lower[i] < bounds.upper[i]))
            throw InvalidBounds("lower[" + std::to_string(i) + "] must be strictly below upper[" +
                                std::to_string(i) + "]");
}

inline void validate_truncation(const TruncationBox& box, std::size_t k) {
    if (box.lower.size() != k || box.upper.size() != k)
        throw DimensionMismatch("truncation box must have " + std::to_string(k) +
                                " entries per side");
    detail::require_no_nan(box.lower, "lower truncation");
    detail::require_no_nan(box.upper, "upper truncation");
    for (std::size_t i = 0; i < k; ++i)
        if (!(box.lower[i] < box.upper[i]))
            throw InvalidBounds("truncation lower[" + std::to_string(i) +
                                "] must be strictly below upper[" + std::to_string(i) + "]");
}

inline void validate_df(double nu) {
    if (!std::isfinite(nu) || nu <= 0.0) throw InvalidDf("degrees of freedom must be a positive real");
}

inline void validate_probability_input(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw DomainError("p must lie strictly between 0 and 1");
}

inline void validate_qmc(const QmcConfig& qmc) {
    if (qmc.shifts < 1) throw DomainError("shifts must be >= 1");
    if (qmc.samples < 1) throw DomainError("samples must be >= 1");
    if (!(qmc.alpha > 0.0) || !std::isfinite(qmc.alpha)) throw DomainError("alpha must be > 0");
}

inline void validate_bisection(const BisectionConfig& cfg) {
    if (cfg.itermax < 1) throw DomainError("itermax must be >= 1");
    if (!(cfg.tolerance > 0.0) || !std::isfinite(cfg.tolerance))
        throw DomainError("tolerance must be > 0");
}

// A point at which a density is evaluated: finite, dimension k.
inline void validate_point(const std::vector<double>& x, std::size_t k) {
    if (x.size() != k)
        throw DimensionMismatch("x must have " + std::to_string(k) + " entries, got " +
                                std::to_string(x.size()));
    detail::require_finite(x, "x");
}

// Validation is total: the result satisfies every type invariant or a typed
// error is thrown. Nothing partially valid escapes.
inline DistributionSpec validate_spec(const LocationVector& delta, const Matrix& sigma,
                                      std::optional<double> nu = std::nullopt,
                                      std::optional<TruncationBox> truncation = std::nullopt) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    const std::size_t k = delta.size();
    validate_scale_matrix(sigma, k);
    if (nu) validate_df(*nu);
    if (truncation) validate_truncation(*truncation, k);
    return DistributionSpec{delta, sigma, nu, truncation};
}

}  // namespace mvdist
