#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <mvdist/quantile.hpp>

#include "oracles.hpp"

using namespace mvdist;

namespace {

Matrix equicorrelated(std::size_t k, double rho) {
    Matrix m(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = i == j ? 1.0 : rho;
    return m;
}

const BisectionConfig kLower{};
const BisectionConfig kUpper{1000000, 1e-6, Tail::Upper};
const BisectionConfig kBoth{1000000, 1e-6, Tail::Both};

}  // namespace

TEST_CASE("univariate normal quantile by bisection") {
    const auto r = mvn_quantile(0.975, {0.0}, Matrix::identity(1));
    CHECK(r.flag == 0);
    CHECK(std::abs(r.fquantile) <= 1e-6);
    CHECK(r.quantile == Approx(1.9599640).margin(5e-5));
    CHECK(r.iterations <= 1000000);
}

TEST_CASE("the median of a symmetric distribution is zero") {
    const auto n = mvn_quantile(0.5, {0.0}, Matrix::identity(1));
    CHECK(n.flag == 0);
    CHECK(n.quantile == Approx(0.0).margin(1e-9));
    const auto t = mvt_quantile(0.5, {0.0}, Matrix::identity(1), 1.0);
    CHECK(t.flag == 0);
    CHECK(t.quantile == Approx(0.0).margin(1e-9));
}

TEST_CASE("Dunnett-style trivariate quantile") {
    const auto r = mvn_quantile(0.95, {0.0, 0.0, 0.0}, equicorrelated(3, 0.5), {}, {}, 1);
    CHECK(r.flag == 0);
    CHECK(r.quantile > 2.04);
    CHECK(r.quantile < 2.08);
    CHECK(std::abs(r.fquantile) <= 1e-6);
}

TEST_CASE("Cauchy quantile via the t family") {
    const auto r = mvt_quantile(0.75, {0.0}, Matrix::identity(1), 1.0);
    CHECK(r.flag == 0);
    CHECK(r.quantile == Approx(oracle::cauchy_quantile(0.75)).margin(1e-4));
    CHECK(r.quantile == Approx(1.0).margin(1e-4));
}

TEST_CASE("large-nu t quantiles approach normal quantiles") {
    const auto t = mvt_quantile(0.9, {0.0, 0.0}, equicorrelated(2, 0.5), 1e6, {}, {}, 3);
    const auto n = mvn_quantile(0.9, {0.0, 0.0}, equicorrelated(2, 0.5), {}, {}, 3);
    REQUIRE(t.flag == 0);
    REQUIRE(n.flag == 0);
    CHECK(t.quantile == Approx(n.quantile).margin(5e-3));
}

TEST_CASE("upper and two-sided tails") {
    // symmetric case: the upper-tail quantile is the negated lower-tail one
    const auto lower = mvn_quantile(0.9, {0.0, 0.0}, equicorrelated(2, 0.3), kLower, {}, 5);
    const auto upper = mvn_quantile(0.9, {0.0, 0.0}, equicorrelated(2, 0.3), kUpper, {}, 5);
    REQUIRE(lower.flag == 0);
    REQUIRE(upper.flag == 0);
    CHECK(lower.quantile == Approx(-upper.quantile).margin(2e-3));

    // univariate two-sided: Phi(-q, q) = p means q = invPhi((1+p)/2)
    const auto both = mvn_quantile(0.9, {0.0}, Matrix::identity(1), kBoth);
    CHECK(both.flag == 0);
    const double expected = oracle::invert_monotone(oracle::normal_cdf, 0.95, -10.0, 10.0);
    CHECK(both.quantile == Approx(expected).margin(1e-4));
}

TEST_CASE("quantiles are monotone in p with matched seeds") {
    double prev = kNegInf;
    for (double p : {0.2, 0.4, 0.6, 0.8, 0.95}) {
        const auto r = mvn_quantile(p, {0.0, 0.0}, equicorrelated(2, 0.5), {}, {}, 7);
        REQUIRE(r.flag == 0);
        CHECK(r.quantile >= prev);
        prev = r.quantile;
    }
}

TEST_CASE("truncated normal quantile against the univariate closed form") {
    const TruncationBox box{{-1.5}, {1.5}};
    // symmetric truncation preserves the median
    const auto med = tmvn_quantile(0.5, {0.0}, Matrix::identity(1), box);
    CHECK(med.flag == 0);
    CHECK(med.quantile == Approx(0.0).margin(1e-6));

    // oracle: p at q = 0.5 for the truncated standard normal on [-1.5, 1.5]
    const double z = oracle::normal_cdf(1.5) - oracle::normal_cdf(-1.5);
    const double p = (oracle::normal_cdf(0.5) - oracle::normal_cdf(-1.5)) / z;  // ~0.7209899
    const auto r = tmvn_quantile(p, {0.0}, Matrix::identity(1), box);
    CHECK(r.flag == 0);
    CHECK(r.quantile == Approx(0.5).margin(1e-4));
}

TEST_CASE("truncated quantiles stay inside the support") {
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        const double a = u(gen), b = u(gen);
        const TruncationBox box{{std::min(a, b) - 0.5}, {std::max(a, b) + 0.5}};
        const double p = 0.05 + 0.9 * (static_cast<double>(gen() % 100) / 100.0);
        const auto r = tmvn_quantile(p, {0.0}, Matrix::identity(1), box, {}, {}, gen());
        CHECK(r.quantile >= box.lower[0]);
        CHECK(r.quantile <= box.upper[0]);
    }
}

TEST_CASE("truncated Cauchy quantile against the arctangent closed form") {
    const TruncationBox box{{-1.5}, {1.5}};
    // median unchanged by symmetric truncation
    const auto med = tmvt_quantile(0.5, {0.0}, Matrix::identity(1), 1.0, box);
    CHECK(med.flag == 0);
    CHECK(med.quantile == Approx(0.0).margin(1e-6));

    // closed form: (atan q + atan 1.5) / (2 atan 1.5) = p
    const double a15 = std::atan(1.5);
    const double expected = std::tan(0.75 * 2.0 * a15 - a15);  // = tan(atan(1.5)/2) ~ 0.53484
    CHECK((std::atan(expected) + a15) / (2.0 * a15) == Approx(0.75).epsilon(1e-12));
    const auto r = tmvt_quantile(0.75, {0.0}, Matrix::identity(1), 1.0, box);
    CHECK(r.flag == 0);
    CHECK(r.quantile == Approx(expected).margin(1e-4));
}

TEST_CASE("a whole-space truncation box reproduces the parent quantile") {
    const TruncationBox all{{kNegInf, kNegInf}, {kPosInf, kPosInf}};
    const auto truncated =
        tmvt_quantile(0.8, {0.0, 0.0}, equicorrelated(2, 0.4), 3.0, all, {}, {}, 9);
    const auto parent = mvt_quantile(0.8, {0.0, 0.0}, equicorrelated(2, 0.4), 3.0, {}, {}, 9);
    REQUIRE(truncated.flag == 0);
    REQUIRE(parent.flag == 0);
    CHECK(truncated.quantile == Approx(parent.quantile).margin(1e-12));
}

TEST_CASE("the frozen objective makes the roundtrip exact") {
    std::mt19937_64 gen(4321);
    for (int rep = 0; rep < 8; ++rep) {
        const double p = 0.1 + 0.8 * (static_cast<double>(gen() % 100) / 100.0);
        const std::uint64_t seed = gen();
        const auto r = mvn_quantile(p, {0.0, 0.0}, equicorrelated(2, 0.5), {}, {}, seed);
        if (r.flag != 0) continue;
        const ExtendedBounds bounds{{kNegInf, kNegInf}, {r.quantile, r.quantile}};
        const auto check = mvn_probability(bounds, {0.0, 0.0}, equicorrelated(2, 0.5), {}, seed);
        CHECK(std::abs(check.value - p) <= 1e-6 + check.error);
        CHECK(r.iterations <= 1000000);
        CHECK((r.flag == 0 || r.flag == 1 || r.flag == 2));
    }
}

TEST_CASE("quantile input validation") {
    CHECK_THROWS_AS(mvn_quantile(0.0, {0.0}, Matrix::identity(1)), DomainError);
    CHECK_THROWS_AS(mvn_quantile(1.0, {0.0}, Matrix::identity(1)), DomainError);
    CHECK_THROWS_AS(mvt_quantile(0.5, {0.0}, Matrix::identity(1), 0.0), InvalidDf);
    CHECK_THROWS_AS(
        mvn_quantile(0.5, {0.0}, Matrix::identity(1), BisectionConfig{0, 1e-6, Tail::Lower}),
        DomainError);
    const TruncationBox far_box{{40.0, 40.0}, {41.0, 41.0}};
    CHECK_THROWS_AS(tmvn_quantile(0.5, {0.0, 0.0}, equicorrelated(2, 0.2), far_box),
                    DegenerateTruncation);
}
