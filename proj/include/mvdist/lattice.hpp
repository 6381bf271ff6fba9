#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include "errors.hpp"

namespace mvdist {

// Rank-1 Korobov lattice with per-shift Cranley-Patterson offsets. The m-th
// point of shift j is frac(m * z / points + offset_j), pushed through the
// baker transform |2w - 1| by the integrator.
struct LatticeRule {
    std::vector<std::uint64_t> generating_vector;  // gcd(z_i, points) = 1
    std::uint64_t points = 0;                      // prime sample count per shift
    std::vector<std::vector<double>> shift_offsets;
};

namespace detail {

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::uint64_t next_prime(std::uint64_t n) {
    while (!is_prime(n)) ++n;
    return n;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// P2 figure of merit of the Korobov vector (1, a, a^2, ...) mod n over dim
// coordinates: the worst-case squared error in the weighted Korobov space,
// computable as a lattice average of products of Bernoulli B2 values.
inline double korobov_merit(std::uint64_t n, std::uint64_t a, std::size_t dim) {
    std::vector<std::uint64_t> z(dim);
    z[0] = 1;
    for (std::size_t i = 1; i < dim; ++i) z[i] = (z[i - 1] * a) % n;

    constexpr double two_pi_sq = 2.0 * 9.869604401089358;  // 2 * pi^2
    std::vector<std::uint64_t> acc(dim, 0);
    const double inv_n = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    for (std::uint64_t m = 0; m < n; ++m) {
        double prod = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double frac = static_cast<double>(acc[i]) * inv_n;
            prod *= 1.0 + two_pi_sq * (frac * (frac - 1.0) + 1.0 / 6.0);
            acc[i] += z[i];
            if (acc[i] >= n) acc[i] -= n;
        }
        sum += prod;
    }
    return sum * inv_n - 1.0;
}

// Deterministic choice of the Korobov multiplier for a prime modulus n and a
// merit dimension: exhaustive over [2, (n-1)/2] for small n (a and n-a give
// reflected, merit-equal lattices), a fixed pseudo-random candidate set for
// large n. Cached per process.
inline std::uint64_t korobov_multiplier(std::uint64_t n, std::size_t dim) {
    if (n <= 3 || dim <= 1) return 1;
    static std::map<std::pair<std::uint64_t, std::size_t>, std::uint64_t> cache;
    static std::mutex mutex;
    const auto key = std::make_pair(n, dim);
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    std::vector<std::uint64_t> candidates;
    if (n <= 4096) {
        for (std::uint64_t a = 2; a <= (n - 1) / 2; ++a) candidates.push_back(a);
    } else {
        for (std::uint64_t j = 0; j < 256; ++j)
            candidates.push_back(2 + splitmix64(n * 1000003ULL + j) % (n / 2 - 2));
    }

    std::uint64_t best = candidates.front();
    double best_merit = korobov_merit(n, best, dim);
    for (std::size_t c = 1; c < candidates.size(); ++c) {
        const double merit = korobov_merit(n, candidates[c], dim);
        if (merit < best_merit || (merit == best_merit && candidates[c] < best)) {
            best_merit = merit;
            best = candidates[c];
        }
    }

    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(key, best);
    return best;
}

inline double uniform_in_01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace detail

// Builds the rule for an integrand over [0,1)^dim: the sample count is rounded
// up to the nearest prime and the shift offsets are drawn i.i.d. uniform from
// a generator seeded with `seed` alone, so one seed fixes every point.
inline LatticeRule make_lattice_rule(std::size_t dim, int samples, int shifts,
                                     std::uint64_t seed) {
    if (dim == 0) throw DomainError("make_lattice_rule: dim must be >= 1");
    if (samples < 1) throw DomainError("make_lattice_rule: samples must be >= 1");
    if (shifts < 1) throw DomainError("make_lattice_rule: shifts must be >= 1");

    LatticeRule rule;
    rule.points = detail::next_prime(static_cast<std::uint64_t>(samples));
    // The merit dimension is capped: beyond a dozen coordinates the criterion
    // barely distinguishes candidates and the search cost grows linearly.
    const std::uint64_t a =
        detail::korobov_multiplier(rule.points, std::min<std::size_t>(dim, 12));
    rule.generating_vector.resize(dim);
    rule.generating_vector[0] = 1;
    for (std::size_t i = 1; i < dim; ++i)
        rule.generating_vector[i] = (rule.generating_vector[i - 1] * a) % rule.points;

    std::mt19937_64 gen(seed);
    rule.shift_offsets.resize(static_cast<std::size_t>(shifts));
    for (auto& offset : rule.shift_offsets) {
        offset.resize(dim);
        for (double& v : offset) v = detail::uniform_in_01(gen);
    }
    return rule;
}

}  // namespace mvdist
