#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "matrix.hpp"
#include "special_functions.hpp"
#include "types.hpp"

namespace mvdist {

// The rectangle problem after variable reordering: a lower-triangular Cholesky
// factor of the permuted scale matrix together with the permuted, centered
// integration limits. permutation[i] is the original index of the variable
// placed at position i.
struct SovProblem {
    Matrix cholesky;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::size_t> permutation;
};

namespace detail {

inline void swap_sov_variable(Matrix& cov, Matrix& chol, std::vector<double>& a,
                              std::vector<double>& b, std::vector<std::size_t>& perm,
                              std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t m = 0; m < cov.rows(); ++m) std::swap(cov(i, m), cov(j, m));
    for (std::size_t m = 0; m < cov.cols(); ++m) std::swap(cov(m, i), cov(m, j));
    for (std::size_t m = 0; m < chol.cols(); ++m) std::swap(chol(i, m), chol(j, m));
    std::swap(a[i], a[j]);
    std::swap(b[i], b[j]);
    std::swap(perm[i], perm[j]);
}

// Greedy ordering: at each step take the remaining variable with the smallest
// estimated conditional mass Phi(e) - Phi(d), with earlier integration
// variables replaced by their conditional expectations, building the Cholesky
// factor incrementally in the chosen order.
inline SovProblem build_sov(const ExtendedBounds& bounds, const LocationVector& delta,
                            const Matrix& sigma, bool reorder) {
    const std::size_t k = delta.size();
    Matrix cov = sigma;
    Matrix chol(k, k);
    std::vector<double> a(k), b(k), y(k);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        a[i] = bounds.lower[i] == kNegInf ? kNegInf : bounds.lower[i] - delta[i];
        b[i] = bounds.upper[i] == kPosInf ? kPosInf : bounds.upper[i] - delta[i];
    }
    const double floor = pd_pivot_floor(sigma);

    for (std::size_t i = 0; i < k; ++i) {
        if (reorder) {
            std::size_t best = i;
            double best_mass = 2.0;
            for (std::size_t j = i; j < k; ++j) {
                double s2 = cov(j, j);
                double center = 0.0;
                for (std::size_t m = 0; m < i; ++m) {
                    s2 -= chol(j, m) * chol(j, m);
                    center += chol(j, m) * y[m];
                }
                const double sd = std::sqrt(std::max(s2, 1e-300));
                const double lo = a[j] == kNegInf ? 0.0 : std_normal_cdf((a[j] - center) / sd);
                const double hi = b[j] == kPosInf ? 1.0 : std_normal_cdf((b[j] - center) / sd);
                const double mass = hi - lo;
                if (mass < best_mass) {
                    best_mass = mass;
                    best = j;
                }
            }
            swap_sov_variable(cov, chol, a, b, perm, i, best);
        }

        double pivot = cov(i, i);
        for (std::size_t m = 0; m < i; ++m) pivot -= chol(i, m) * chol(i, m);
        if (!(pivot > floor))
            throw NotPositiveDefinite("sigma is not positive definite (pivot " +
                                      std::to_string(pivot) + " at reordered position " +
                                      std::to_string(i) + ")");
        chol(i, i) = std::sqrt(pivot);
        for (std::size_t r = i + 1; r < k; ++r) {
            double s = cov(r, i);
            for (std::size_t m = 0; m < i; ++m) s -= chol(r, m) * chol(i, m);
            chol(r, i) = s / chol(i, i);
        }

        double center = 0.0;
        for (std::size_t m = 0; m < i; ++m) center += chol(i, m) * y[m];
        const double d = a[i] == kNegInf ? kNegInf : (a[i] - center) / chol(i, i);
        const double e = b[i] == kPosInf ? kPosInf : (b[i] - center) / chol(i, i);
        const double mass = (e == kPosInf ? 1.0 : std_normal_cdf(e)) -
                            (d == kNegInf ? 0.0 : std_normal_cdf(d));
        if (mass > 1e-100) {
            const double pdf_d = d == kNegInf ? 0.0 : std_normal_pdf(d);
            const double pdf_e = e == kPosInf ? 0.0 : std_normal_pdf(e);
            y[i] = (pdf_d - pdf_e) / mass;
        } else if (d == kNegInf && e == kPosInf) {
            y[i] = 0.0;
        } else if (d == kNegInf) {
            y[i] = e;
        } else if (e == kPosInf) {
            y[i] = d;
        } else {
            y[i] = 0.5 * (d + e);
        }
    }
    return SovProblem{std::move(chol), std::move(a), std::move(b), std::move(perm)};
}

// Separation-of-variables integrand over [0,1)^{k-1}. `scale` multiplies the
// (already centered) limits; the chi-mixing path of the t integral passes the
// per-point scale, the normal path passes 1.
inline double sov_integrand(const SovProblem& problem, const double* w, double scale,
                            std::vector<double>& y) {
    const Matrix& c = problem.cholesky;
    const std::size_t k = problem.lower.size();
    double d = problem.lower[0] == kNegInf
                   ? 0.0
                   : std_normal_cdf(scale * problem.lower[0] / c(0, 0));
    double e = problem.upper[0] == kPosInf
                   ? 1.0
                   : std_normal_cdf(scale * problem.upper[0] / c(0, 0));
    double f = std::max(0.0, e - d);
    for (std::size_t i = 1; i < k && f > 0.0; ++i) {
        y[i - 1] = std_normal_inv_cdf(d + w[i - 1] * (e - d));
        double center = 0.0;
        for (std::size_t j = 0; j < i; ++j) center += c(i, j) * y[j];
        d = problem.lower[i] == kNegInf
                ? 0.0
                : std_normal_cdf((scale * problem.lower[i] - center) / c(i, i));
        e = problem.upper[i] == kPosInf
                ? 1.0
                : std_normal_cdf((scale * problem.upper[i] - center) / c(i, i));
        f *= std::max(0.0, e - d);
    }
    return f;
}

// Randomized-lattice average: per shift, the integrand is averaged over the
// baker-transformed lattice points and their antithetic reflections (the pair
// w, 1-w), which suppresses the odd error components that otherwise produce
// outlier shift means. The shift means give the value and the alpha-scaled
// standard error. Shift evaluations are schedule-independent, so the result
// does not depend on the thread count.
template <typename PointFn>
inline ProbabilityEstimate qmc_estimate(std::size_t dim, const QmcConfig& qmc,
                                        std::uint64_t seed, int threads, PointFn&& point_fn) {
    const LatticeRule rule = make_lattice_rule(dim, qmc.samples, qmc.shifts, seed);
    const std::uint64_t n = rule.points;
    const double inv_n = 1.0 / static_cast<double>(n);
    const std::size_t shift_count = rule.shift_offsets.size();
    std::vector<double> shift_means(shift_count);

    auto run_shift = [&](std::size_t j) {
        const std::vector<double>& offset = rule.shift_offsets[j];
        std::vector<std::uint64_t> acc(dim, 0);
        std::vector<double> w(dim);
        double sum = 0.0;
        for (std::uint64_t m = 1; m <= n; ++m) {
            for (std::size_t i = 0; i < dim; ++i) {
                acc[i] += rule.generating_vector[i];
                if (acc[i] >= n) acc[i] -= n;
                double t = static_cast<double>(acc[i]) * inv_n + offset[i];
                if (t >= 1.0) t -= 1.0;
                w[i] = std::abs(2.0 * t - 1.0);
            }
            const double forward = point_fn(w.data());
            for (std::size_t i = 0; i < dim; ++i) w[i] = 1.0 - w[i];
            sum += 0.5 * (forward + point_fn(w.data()));
        }
        shift_means[j] = sum * inv_n;
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t worker_count =
        std::min<std::size_t>(threads > 0 ? static_cast<unsigned>(threads) : hw, shift_count);
    if (worker_count <= 1) {
        for (std::size_t j = 0; j < shift_count; ++j) run_shift(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (std::size_t t = 0; t < worker_count; ++t)
            workers.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < shift_count; j = next.fetch_add(1))
                    run_shift(j);
            });
        for (auto& t : workers) t.join();
    }

    double mean = 0.0;
    for (double m : shift_means) mean += m;
    mean /= static_cast<double>(shift_count);
    double error = 0.0;
    if (shift_count > 1) {
        double ss = 0.0;
        for (double m : shift_means) ss += (m - mean) * (m - mean);
        const double var_of_mean =
            ss / static_cast<double>(shift_count - 1) / static_cast<double>(shift_count);
        error = qmc.alpha * std::sqrt(var_of_mean);
    }
    return ProbabilityEstimate{std::clamp(mean, 0.0, 1.0), error};
}

inline void validate_rectangle_inputs(const ExtendedBounds& bounds, const LocationVector& delta,
                                      const Matrix& sigma, const QmcConfig& qmc) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_bounds(bounds, delta.size());
    validate_qmc(qmc);
}

}  // namespace detail

// Gibson greedy reordering plus incremental Cholesky factorization of the
// permuted scale matrix; the limits come out centered at delta.
inline SovProblem reorder_variables(const ExtendedBounds& bounds, const LocationVector& delta,
                                    const Matrix& sigma) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_bounds(bounds, delta.size());
    return detail::build_sov(bounds, delta, sigma, true);
}

// Phi_k(a, b, delta, sigma). Univariate problems reduce to the closed-form CDF
// difference with zero error; otherwise the randomized-lattice estimate with
// error = alpha * stderr of the shift means. One seed fixes the result bit for
// bit regardless of thread count.
inline ProbabilityEstimate mvn_probability(const ExtendedBounds& bounds,
                                           const LocationVector& delta, const Matrix& sigma,
                                           const QmcConfig& qmc = {}, std::uint64_t seed = 0,
                                           int threads = 0) {
    detail::validate_rectangle_inputs(bounds, delta, sigma, qmc);
    const std::size_t k = delta.size();
    if (k == 1) {
        const double sd = std::sqrt(sigma(0, 0));
        const double lo = bounds.lower[0] == kNegInf
                              ? 0.0
                              : std_normal_cdf((bounds.lower[0] - delta[0]) / sd);
        const double hi = bounds.upper[0] == kPosInf
                              ? 1.0
                              : std_normal_cdf((bounds.upper[0] - delta[0]) / sd);
        return ProbabilityEstimate{std::clamp(hi - lo, 0.0, 1.0), 0.0};
    }
    const SovProblem problem = detail::build_sov(bounds, delta, sigma, true);
    return detail::qmc_estimate(k - 1, qmc, seed, threads, [&](const double* w) {
        thread_local std::vector<double> y;
        if (y.size() < k) y.assign(k, 0.0);
        return detail::sov_integrand(problem, w, 1.0, y);
    });
}

// Psi_k(a, b, delta, sigma, nu), the location-shifted noncentral t rectangle
// probability: the first lattice coordinate drives the chi mixing variable
// s = chi_quantile(u, nu)/sqrt(nu), the rest drive the normal recursion on the
// scaled limits s*(a - delta), s*(b - delta).
inline ProbabilityEstimate mvt_probability(const ExtendedBounds& bounds,
                                           const LocationVector& delta, const Matrix& sigma,
                                           double nu, const QmcConfig& qmc = {},
                                           std::uint64_t seed = 0, int threads = 0) {
    detail::validate_rectangle_inputs(bounds, delta, sigma, qmc);
    validate_df(nu);
    const std::size_t k = delta.size();
    if (k == 1) {
        const double sd = std::sqrt(sigma(0, 0));
        const double lo = bounds.lower[0] == kNegInf
                              ? 0.0
                              : student_t_cdf((bounds.lower[0] - delta[0]) / sd, nu);
        const double hi = bounds.upper[0] == kPosInf
                              ? 1.0
                              : student_t_cdf((bounds.upper[0] - delta[0]) / sd, nu);
        return ProbabilityEstimate{std::clamp(hi - lo, 0.0, 1.0), 0.0};
    }
    const SovProblem problem = detail::build_sov(bounds, delta, sigma, true);
    const double inv_sqrt_nu = 1.0 / std::sqrt(nu);
    return detail::qmc_estimate(k, qmc, seed, threads, [&](const double* w) {
        thread_local std::vector<double> y;
        if (y.size() < k) y.assign(k, 0.0);
        const double scale = chi_quantile(w[0], nu) * inv_sqrt_nu;
        return detail::sov_integrand(problem, w + 1, scale, y);
    });
}

namespace detail {

inline ExtendedBounds clip_to_box(const ExtendedBounds& bounds, const TruncationBox& box,
                                  bool& empty) {
    ExtendedBounds clipped;
    const std::size_t k = bounds.lower.size();
    clipped.lower.resize(k);
    clipped.upper.resize(k);
    empty = false;
    for (std::size_t i = 0; i < k; ++i) {
        clipped.lower[i] = std::max(bounds.lower[i], box.lower[i]);
        clipped.upper[i] = std::min(bounds.upper[i], box.upper[i]);
        if (!(clipped.lower[i] < clipped.upper[i])) empty = true;
    }
    return clipped;
}

template <typename Estimator>
inline ProbabilityEstimate truncated_quotient(const ExtendedBounds& bounds,
                                              const TruncationBox& box, std::size_t k,
                                              Estimator&& estimate) {
    validate_truncation(box, k);
    const ProbabilityEstimate denom = estimate(ExtendedBounds{box.lower, box.upper});
    if (denom.value <= denom.error)
        throw DegenerateTruncation(
            "truncation box probability " + std::to_string(denom.value) +
            " is statistically indistinguishable from zero (error bound " +
            std::to_string(denom.error) + ")");
    bool empty = false;
    const ExtendedBounds clipped = clip_to_box(bounds, box, empty);
    const ProbabilityEstimate numer = empty ? ProbabilityEstimate{0.0, 0.0} : estimate(clipped);
    const double ratio = numer.value / denom.value;
    const double error = std::max(0.0, (numer.error + ratio * denom.error) / denom.value);
    return ProbabilityEstimate{std::clamp(ratio, 0.0, 1.0), error};
}

}  // namespace detail

// Phi'_k: the numerator integrates over the rectangle clipped to the box, the
// denominator is the box probability, both with the same seed (common random
// numbers); the error follows the first-order quotient rule.
inline ProbabilityEstimate tmvn_probability(const ExtendedBounds& bounds,
                                            const LocationVector& delta, const Matrix& sigma,
                                            const TruncationBox& box, const QmcConfig& qmc = {},
                                            std::uint64_t seed = 0, int threads = 0) {
    detail::validate_rectangle_inputs(bounds, delta, sigma, qmc);
    return detail::truncated_quotient(bounds, box, delta.size(), [&](const ExtendedBounds& b) {
        return mvn_probability(b, delta, sigma, qmc, seed, threads);
    });
}

// Psi'_k, as tmvn_probability with t components.
inline ProbabilityEstimate tmvt_probability(const ExtendedBounds& bounds,
                                            const LocationVector& delta, const Matrix& sigma,
                                            double nu, const TruncationBox& box,
                                            const QmcConfig& qmc = {}, std::uint64_t seed = 0,
                                            int threads = 0) {
    detail::validate_rectangle_inputs(bounds, delta, sigma, qmc);
    validate_df(nu);
    return detail::truncated_quotient(bounds, box, delta.size(), [&](const ExtendedBounds& b) {
        return mvt_probability(b, delta, sigma, nu, qmc, seed, threads);
    });
}

}  // namespace mvdist
