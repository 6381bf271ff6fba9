#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "special_functions.hpp"
#include "types.hpp"

namespace mvdist {

// n rows of k-dimensional draws, in emission order. The seed and the
// factorization method fully determine the contents.
struct SampleMatrix {
    Matrix draws;
    std::uint64_t seed = 0;
    FactorizationMethod method = FactorizationMethod::Cholesky;
};

namespace detail {

// Strictly inside (0,1): normal and chi-square variates go through inverse
// CDFs, which keeps the draw count per variate fixed and the stream
// reproducible.
inline double uniform_open_01(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

inline void draw_centered_normal_row(const Matrix& r, std::mt19937_64& gen,
                                     std::vector<double>& z, std::vector<double>& row) {
    const std::size_t k = r.rows();
    for (std::size_t i = 0; i < k; ++i) z[i] = std_normal_inv_cdf(uniform_open_01(gen));
    for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += r(i, j) * z[j];
        row[i] = s;
    }
}

inline void validate_sampler_inputs(std::size_t n, const LocationVector& delta,
                                    const Matrix& sigma) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
}

}  // namespace detail

// Pseudo-random vectors from N_k(delta, sigma): row = delta + R z with
// R R^T = sigma and independent standard normal z from the seeded generator.
inline SampleMatrix sample_mvn(std::size_t n, const LocationVector& delta, const Matrix& sigma,
                               FactorizationMethod method = FactorizationMethod::Cholesky,
                               std::uint64_t seed = 0) {
    detail::validate_sampler_inputs(n, delta, sigma);
    const std::size_t k = delta.size();
    const Matrix r = matrix_sqrt(sigma, method).entries;
    std::mt19937_64 gen(seed);
    Matrix draws(n, k);
    std::vector<double> z(k), row(k);
    for (std::size_t m = 0; m < n; ++m) {
        detail::draw_centered_normal_row(r, gen, z, row);
        for (std::size_t i = 0; i < k; ++i) draws(m, i) = delta[i] + row[i];
    }
    return SampleMatrix{std::move(draws), seed, method};
}

// Pseudo-random vectors from T_k(delta, sigma, nu): x = delta + y sqrt(nu/v)
// with y ~ N_k(0, sigma) and v a chi-square(nu) variate drawn by inverse CDF.
inline SampleMatrix sample_mvt(std::size_t n, const LocationVector& delta, const Matrix& sigma,
                               double nu, FactorizationMethod method = FactorizationMethod::Cholesky,
                               std::uint64_t seed = 0) {
    detail::validate_sampler_inputs(n, delta, sigma);
    validate_df(nu);
    const std::size_t k = delta.size();
    const Matrix r = matrix_sqrt(sigma, method).entries;
    std::mt19937_64 gen(seed);
    Matrix draws(n, k);
    std::vector<double> z(k), row(k);
    for (std::size_t m = 0; m < n; ++m) {
        detail::draw_centered_normal_row(r, gen, z, row);
        const double v = chi_square_quantile(detail::uniform_open_01(gen), nu);
        const double factor = std::sqrt(nu / v);
        for (std::size_t i = 0; i < k; ++i) draws(m, i) = delta[i] + row[i] * factor;
    }
    return SampleMatrix{std::move(draws), seed, method};
}

namespace detail {

inline bool row_inside_closed_box(const std::vector<double>& row, const LocationVector& delta,
                                  const TruncationBox& box, double factor) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double x = delta[i] + row[i] * factor;
        if (x < box.lower[i] || x > box.upper[i]) return false;
    }
    return true;
}

// Rejection loop shared by the truncated samplers: draw from the parent
// distribution, keep in-box rows, give up once the proposal budget is spent.
template <typename DrawFactor>
inline SampleMatrix rejection_sample(std::size_t n, const LocationVector& delta,
                                     const Matrix& sigma, const TruncationBox& box,
                                     FactorizationMethod method, std::uint64_t seed,
                                     std::uint64_t max_attempts, DrawFactor&& draw_factor) {
    const std::size_t k = delta.size();
    const Matrix r = matrix_sqrt(sigma, method).entries;
    std::mt19937_64 gen(seed);
    Matrix draws(n, k);
    std::vector<double> z(k), row(k);
    std::uint64_t accepted = 0;
    std::uint64_t proposals = 0;
    while (accepted < n) {
        if (proposals >= max_attempts) {
            const double rate =
                static_cast<double>(accepted) / static_cast<double>(proposals);
            throw AcceptanceTooLow(
                "rejection sampling accepted " + std::to_string(accepted) + " of " +
                    std::to_string(proposals) + " proposals (acceptance rate " +
                    std::to_string(rate) + "); the truncation box is too improbable",
                rate);
        }
        draw_centered_normal_row(r, gen, z, row);
        const double factor = draw_factor(gen);
        ++proposals;
        if (row_inside_closed_box(row, delta, box, factor)) {
            for (std::size_t i = 0; i < k; ++i) draws(accepted, i) = delta[i] + row[i] * factor;
            ++accepted;
        }
    }
    return SampleMatrix{std::move(draws), seed, method};
}

}  // namespace detail

// Rejection sampling from TN_k(delta, sigma, l, u): parent draws are kept only
// when every coordinate lies in the closed box. max_attempts bounds the total
// proposal count across all rows.
inline SampleMatrix sample_tmvn(std::size_t n, const LocationVector& delta, const Matrix& sigma,
                                const TruncationBox& box,
                                FactorizationMethod method = FactorizationMethod::Cholesky,
                                std::uint64_t seed = 0, std::uint64_t max_attempts = 10000000) {
    detail::validate_sampler_inputs(n, delta, sigma);
    validate_truncation(box, delta.size());
    return detail::rejection_sample(n, delta, sigma, box, method, seed, max_attempts,
                                    [](std::mt19937_64&) { return 1.0; });
}

inline SampleMatrix sample_tmvt(std::size_t n, const LocationVector& delta, const Matrix& sigma,
                                double nu, const TruncationBox& box,
                                FactorizationMethod method = FactorizationMethod::Cholesky,
                                std::uint64_t seed = 0, std::uint64_t max_attempts = 10000000) {
    detail::validate_sampler_inputs(n, delta, sigma);
    validate_df(nu);
    validate_truncation(box, delta.size());
    return detail::rejection_sample(n, delta, sigma, box, method, seed, max_attempts,
                                    [nu](std::mt19937_64& gen) {
                                        const double v =
                                            chi_square_quantile(detail::uniform_open_01(gen), nu);
                                        return std::sqrt(nu / v);
                                    });
}

}  // namespace mvdist
