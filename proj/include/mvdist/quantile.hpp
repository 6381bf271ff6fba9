#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "probability.hpp"
#include "special_functions.hpp"
#include "types.hpp"

namespace mvdist {

namespace detail {

// The equicoordinate rectangle for a candidate quantile. Both tails of a
// two-sided search collapse to an empty rectangle at q <= 0, which carries
// zero probability without consulting the integrator.
inline ExtendedBounds tail_bounds(double q, std::size_t k, Tail tail) {
    ExtendedBounds bounds;
    bounds.lower.assign(k, tail == Tail::Lower ? kNegInf : (tail == Tail::Upper ? q : -q));
    bounds.upper.assign(k, tail == Tail::Upper ? kPosInf : q);
    return bounds;
}

// Modified interval bisection over a deterministic objective: every
// evaluation reuses the same seed, so the shift offsets are frozen for the
// whole search and the empirical objective is a fixed function of q.
//
// g(q) must be non-decreasing; the caller flips the sign for upper tails.
// Each objective evaluation counts as one iteration. flag 0 requires the
// residual to meet the tolerance; a bracket that collapses to the tolerance
// width without that (possible when the integrand is much steeper than the
// integrator noise floor) reports flag 1.
template <typename Objective>
inline QuantileResult bisect_quantile(const BisectionConfig& cfg, double center, double step0,
                                      double bracket_min, double bracket_max, bool decreasing,
                                      Objective&& objective) {
    long iterations = 0;
    const auto eval = [&](double q) {
        ++iterations;
        const auto [fq, integ_error] = objective(q);
        return std::tuple<double, double, double>(decreasing ? -fq : fq, fq, integ_error);
    };
    const auto result = [&](double q, double g_raw, double integ_error, int flag,
                            double half_width) {
        return QuantileResult{q, half_width + integ_error, flag, g_raw, iterations};
    };

    double lo = std::clamp(center, bracket_min, bracket_max);
    double hi = lo;
    auto [g_lo, f_lo, e_lo] = eval(lo);
    double g_hi = g_lo, f_hi = f_lo, e_hi = e_lo;
    if (std::abs(f_lo) <= cfg.tolerance) return result(lo, f_lo, e_lo, 0, 0.0);

    double step = step0;
    for (int expansion = 0; expansion < 60 && !(g_lo <= 0.0 && g_hi >= 0.0); ++expansion) {
        if (iterations >= cfg.itermax) break;
        if (g_lo > 0.0 && lo > bracket_min) {
            lo = std::max(bracket_min, lo - step);
            std::tie(g_lo, f_lo, e_lo) = eval(lo);
        }
        if (g_hi < 0.0 && hi < bracket_max && iterations < cfg.itermax) {
            hi = std::min(bracket_max, hi + step);
            std::tie(g_hi, f_hi, e_hi) = eval(hi);
        }
        step *= 2.0;
    }
    if (!(g_lo <= 0.0 && g_hi >= 0.0)) {
        const bool lo_closer = std::abs(g_lo) <= std::abs(g_hi);
        const int flag = iterations >= cfg.itermax ? 1 : 2;
        return result(lo_closer ? lo : hi, lo_closer ? f_lo : f_hi, lo_closer ? e_lo : e_hi,
                      flag, 0.5 * (hi - lo));
    }
    if (std::abs(f_lo) <= cfg.tolerance) return result(lo, f_lo, e_lo, 0, 0.0);
    if (std::abs(f_hi) <= cfg.tolerance) return result(hi, f_hi, e_hi, 0, 0.0);

    while (true) {
        if (iterations >= cfg.itermax) {
            const bool lo_closer = std::abs(f_lo) <= std::abs(f_hi);
            return result(lo_closer ? lo : hi, lo_closer ? f_lo : f_hi, lo_closer ? e_lo : e_hi,
                          1, 0.5 * (hi - lo));
        }
        const double mid = 0.5 * (lo + hi);
        const auto [g_mid, f_mid, e_mid] = eval(mid);
        if (std::abs(f_mid) <= cfg.tolerance) return result(mid, f_mid, e_mid, 0, 0.5 * (hi - lo));
        if (g_mid < 0.0) {
            lo = mid;
            g_lo = g_mid;
            f_lo = f_mid;
            e_lo = e_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
            f_hi = f_mid;
            e_hi = e_mid;
        }
        if (hi - lo <= cfg.tolerance) return result(mid, f_mid, e_mid, 1, 0.5 * (hi - lo));
    }
}

inline std::size_t smallest_variance_index(const Matrix& sigma) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < sigma.rows(); ++j)
        if (sigma(j, j) < sigma(best, best)) best = j;
    return best;
}

// The search seeded at the univariate quantile of the steadiest coordinate.
inline double quantile_center(double p, const LocationVector& delta, const Matrix& sigma,
                              Tail tail) {
    const std::size_t j = smallest_variance_index(sigma);
    const double sd = std::sqrt(sigma(j, j));
    switch (tail) {
        case Tail::Lower:
            return delta[j] + sd * std_normal_inv_cdf(p);
        case Tail::Upper:
            return delta[j] + sd * std_normal_inv_cdf(1.0 - p);
        case Tail::Both:
            return sd * std_normal_inv_cdf(0.5 * (1.0 + p));
    }
    return 0.0;
}

template <typename TailProbability>
inline QuantileResult equicoordinate_quantile(double p, const LocationVector& delta,
                                              const Matrix& sigma, const BisectionConfig& cfg,
                                              double bracket_min, double bracket_max,
                                              TailProbability&& tail_probability) {
    validate_probability_input(p);
    validate_bisection(cfg);
    const Tail tail = cfg.tail;
    if (tail == Tail::Both) bracket_min = std::max(bracket_min, 0.0);
    const double center = quantile_center(p, delta, sigma, tail);
    const double step0 = std::sqrt(sigma(smallest_variance_index(sigma),
                                         smallest_variance_index(sigma)));
    const bool decreasing = tail == Tail::Upper;
    return bisect_quantile(cfg, center, step0, bracket_min, bracket_max, decreasing,
                           [&](double q) -> std::pair<double, double> {
                               if (tail == Tail::Both && q <= 0.0) return {-p, 0.0};
                               const ProbabilityEstimate est = tail_probability(q);
                               return {est.value - p, est.error};
                           });
}

}  // namespace detail

// q with p = Phi_k over the tail rectangle (lower: (-inf, q], upper: [q, inf),
// both: [-q, q]); |fquantile| <= tolerance whenever flag = 0. Shift offsets
// are frozen across the search (one seed), making the objective deterministic.
inline QuantileResult mvn_quantile(double p, const LocationVector& delta, const Matrix& sigma,
                                   const BisectionConfig& cfg = {}, const QmcConfig& qmc = {},
                                   std::uint64_t seed = 0, int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_qmc(qmc);
    const std::size_t k = delta.size();
    return detail::equicoordinate_quantile(
        p, delta, sigma, cfg, kNegInf, kPosInf, [&](double q) {
            return mvn_probability(detail::tail_bounds(q, k, cfg.tail), delta, sigma, qmc, seed,
                                   threads);
        });
}

inline QuantileResult mvt_quantile(double p, const LocationVector& delta, const Matrix& sigma,
                                   double nu, const BisectionConfig& cfg = {},
                                   const QmcConfig& qmc = {}, std::uint64_t seed = 0,
                                   int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_df(nu);
    validate_qmc(qmc);
    const std::size_t k = delta.size();
    return detail::equicoordinate_quantile(
        p, delta, sigma, cfg, kNegInf, kPosInf, [&](double q) {
            return mvt_probability(detail::tail_bounds(q, k, cfg.tail), delta, sigma, nu, qmc,
                                   seed, threads);
        });
}

namespace detail {

// Truncated tail probability with the box probability hoisted out of the
// search: the denominator does not depend on q.
template <typename RectProbability>
inline QuantileResult truncated_equicoordinate_quantile(
    double p, const LocationVector& delta, const Matrix& sigma, const TruncationBox& box,
    const BisectionConfig& cfg, RectProbability&& rect_probability) {
    validate_truncation(box, delta.size());
    const ProbabilityEstimate denom =
        rect_probability(ExtendedBounds{box.lower, box.upper});
    if (denom.value <= denom.error)
        throw DegenerateTruncation("truncation box probability " + std::to_string(denom.value) +
                                   " is statistically indistinguishable from zero (error bound " +
                                   std::to_string(denom.error) + ")");
    const std::size_t k = delta.size();
    double bracket_min = kPosInf, bracket_max = kNegInf;
    for (std::size_t i = 0; i < k; ++i) {
        bracket_min = std::min(bracket_min, box.lower[i]);
        bracket_max = std::max(bracket_max, box.upper[i]);
    }
    if (cfg.tail == Tail::Both) {
        double radius = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            radius = std::max({radius, std::abs(box.lower[i]), std::abs(box.upper[i])});
        bracket_min = 0.0;
        bracket_max = radius;  // +inf when any side is unbounded
    }
    return equicoordinate_quantile(
        p, delta, sigma, cfg, bracket_min, bracket_max, [&](double q) -> ProbabilityEstimate {
            bool empty = false;
            const ExtendedBounds clipped = clip_to_box(tail_bounds(q, k, cfg.tail), box, empty);
            const ProbabilityEstimate numer =
                empty ? ProbabilityEstimate{0.0, 0.0} : rect_probability(clipped);
            const double ratio = numer.value / denom.value;
            const double error = std::max(0.0, (numer.error + ratio * denom.error) / denom.value);
            return ProbabilityEstimate{std::clamp(ratio, 0.0, 1.0), error};
        });
}

}  // namespace detail

// q with p = Phi'_k over the tail rectangle; the search bracket is confined to
// [min_i l_i, max_i u_i], so the returned quantile stays inside the support.
inline QuantileResult tmvn_quantile(double p, const LocationVector& delta, const Matrix& sigma,
                                    const TruncationBox& box, const BisectionConfig& cfg = {},
                                    const QmcConfig& qmc = {}, std::uint64_t seed = 0,
                                    int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_qmc(qmc);
    return detail::truncated_equicoordinate_quantile(
        p, delta, sigma, box, cfg, [&](const ExtendedBounds& bounds) {
            return mvn_probability(bounds, delta, sigma, qmc, seed, threads);
        });
}

inline QuantileResult tmvt_quantile(double p, const LocationVector& delta, const Matrix& sigma,
                                    double nu, const TruncationBox& box,
                                    const BisectionConfig& cfg = {}, const QmcConfig& qmc = {},
                                    std::uint64_t seed = 0, int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_df(nu);
    validate_qmc(qmc);
    return detail::truncated_equicoordinate_quantile(
        p, delta, sigma, box, cfg, [&](const ExtendedBounds& bounds) {
            return mvt_probability(bounds, delta, sigma, nu, qmc, seed, threads);
        });
}

}  // namespace mvdist
