#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "probability.hpp"
#include "special_functions.hpp"
#include "types.hpp"

namespace mvdist {

// phi_k(x, delta, sigma). Determinant and quadratic form go through the
// Cholesky factor; everything stays in log space until the end.
inline double mvn_density(const std::vector<double>& x, const LocationVector& delta,
                          const Matrix& sigma, bool log_scale = false) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_point(x, delta.size());
    const std::size_t k = delta.size();
    const Matrix l = cholesky_lower(sigma);

    double log_det = 0.0;
    for (std::size_t i = 0; i < k; ++i) log_det += 2.0 * std::log(l(i, i));
    std::vector<double> centered(k);
    for (std::size_t i = 0; i < k; ++i) centered[i] = x[i] - delta[i];
    const std::vector<double> z = forward_solve(l, centered);
    double quad = 0.0;
    for (double v : z) quad += v * v;

    const double log_pdf = -0.5 * (static_cast<double>(k) * std::log(2.0 * std::numbers::pi) +
                                   log_det + quad);
    return log_scale ? log_pdf : std::exp(log_pdf);
}

// psi_k(x, delta, sigma, nu): the location-shifted noncentral t density.
inline double mvt_density(const std::vector<double>& x, const LocationVector& delta,
                          const Matrix& sigma, double nu, bool log_scale = false) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_df(nu);
    validate_point(x, delta.size());
    const std::size_t k = delta.size();
    const Matrix l = cholesky_lower(sigma);

    double log_det = 0.0;
    for (std::size_t i = 0; i < k; ++i) log_det += 2.0 * std::log(l(i, i));
    std::vector<double> centered(k);
    for (std::size_t i = 0; i < k; ++i) centered[i] = x[i] - delta[i];
    const std::vector<double> z = forward_solve(l, centered);
    double quad = 0.0;
    for (double v : z) quad += v * v;

    const double kd = static_cast<double>(k);
    const double log_pdf = log_gamma(0.5 * (nu + kd)) - log_gamma(0.5 * nu) -
                           0.5 * (kd * std::log(nu * std::numbers::pi) + log_det) -
                           0.5 * (nu + kd) * std::log1p(quad / nu);
    return log_scale ? log_pdf : std::exp(log_pdf);
}

// Memoizes truncation-box probabilities keyed by the full parameter set
// (delta, sigma, nu, box, qmc configuration, seed). Safe for concurrent
// readers; the first caller for a key populates it.
class NormalizingCache {
public:
    template <typename Compute>
    ProbabilityEstimate get_or_compute(const std::vector<double>& key, Compute&& compute) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (auto it = values_.find(key); it != values_.end()) return it->second;
        }
        const ProbabilityEstimate value = compute();
        std::lock_guard<std::mutex> lock(mutex_);
        return values_.emplace(key, value).first->second;
    }

private:
    std::map<std::vector<double>, ProbabilityEstimate> values_;
    std::mutex mutex_;
};

namespace detail {

inline std::vector<double> normalizing_key(const LocationVector& delta, const Matrix& sigma,
                                           std::optional<double> nu, const TruncationBox& box,
                                           const QmcConfig& qmc, std::uint64_t seed) {
    std::vector<double> key;
    key.reserve(delta.size() * 3 + sigma.data().size() + 6);
    key.push_back(static_cast<double>(delta.size()));
    key.insert(key.end(), delta.begin(), delta.end());
    key.insert(key.end(), sigma.data().begin(), sigma.data().end());
    key.push_back(nu ? *nu : -1.0);
    key.insert(key.end(), box.lower.begin(), box.lower.end());
    key.insert(key.end(), box.upper.begin(), box.upper.end());
    key.push_back(static_cast<double>(qmc.shifts));
    key.push_back(static_cast<double>(qmc.samples));
    key.push_back(qmc.alpha);
    // 2^64 does not fit a double exactly; split the seed to keep keys faithful
    key.push_back(static_cast<double>(seed & 0xffffffffULL));
    key.push_back(static_cast<double>(seed >> 32));
    return key;
}

inline bool inside_closed_box(const std::vector<double>& x, const TruncationBox& box) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < box.lower[i] || x[i] > box.upper[i]) return false;
    return true;
}

template <typename ParentLogDensity, typename BoxProbability>
inline double truncated_density(const std::vector<double>& x, const TruncationBox& box,
                                bool log_scale, NormalizingCache* cache,
                                const std::vector<double>& key, ParentLogDensity&& parent_log,
                                BoxProbability&& box_probability) {
    if (!inside_closed_box(x, box)) return log_scale ? kNegInf : 0.0;
    ProbabilityEstimate normalizer;
    if (cache != nullptr)
        normalizer = cache->get_or_compute(key, box_probability);
    else
        normalizer = box_probability();
    if (normalizer.value <= normalizer.error)
        throw DegenerateTruncation("truncation box probability " +
                                   std::to_string(normalizer.value) +
                                   " is statistically indistinguishable from zero");
    const double log_pdf = parent_log() - std::log(normalizer.value);
    return log_scale ? log_pdf : std::exp(log_pdf);
}

}  // namespace detail

// phi'_k: zero outside the closed box, phi_k / Phi_k(l, u, delta, sigma)
// inside. Points exactly on the boundary count as inside. The normalizing
// constant for one (parameters, seed) pair can be cached across point
// evaluations by passing a NormalizingCache.
inline double tmvn_density(const std::vector<double>& x, const LocationVector& delta,
                           const Matrix& sigma, const TruncationBox& box, bool log_scale = false,
                           const QmcConfig& qmc = {}, std::uint64_t seed = 0,
                           NormalizingCache* cache = nullptr, int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_truncation(box, delta.size());
    validate_point(x, delta.size());
    validate_qmc(qmc);
    return detail::truncated_density(
        x, box, log_scale, cache, detail::normalizing_key(delta, sigma, std::nullopt, box, qmc, seed),
        [&] { return mvn_density(x, delta, sigma, true); },
        [&] {
            return mvn_probability(ExtendedBounds{box.lower, box.upper}, delta, sigma, qmc, seed,
                                   threads);
        });
}

// psi'_k, as tmvn_density with t components.
inline double tmvt_density(const std::vector<double>& x, const LocationVector& delta,
                           const Matrix& sigma, double nu, const TruncationBox& box,
                           bool log_scale = false, const QmcConfig& qmc = {},
                           std::uint64_t seed = 0, NormalizingCache* cache = nullptr,
                           int threads = 0) {
    if (delta.empty()) throw DimensionMismatch("delta must have at least one entry");
    detail::require_finite(delta, "delta");
    validate_scale_matrix(sigma, delta.size());
    validate_df(nu);
    validate_truncation(box, delta.size());
    validate_point(x, delta.size());
    validate_qmc(qmc);
    return detail::truncated_density(
        x, box, log_scale, cache, detail::normalizing_key(delta, sigma, nu, box, qmc, seed),
        [&] { return mvt_density(x, delta, sigma, nu, true); },
        [&] {
            return mvt_probability(ExtendedBounds{box.lower, box.upper}, delta, sigma, nu, qmc,
                                   seed, threads);
        });
}

}  // namespace mvdist
