#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include <mvdist/density.hpp>

#include "oracles.hpp"

using namespace mvdist;

namespace {

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

const Matrix kExampleSigma = make_matrix({{1.0, 0.5}, {0.5, 1.0}});

}  // namespace

TEST_CASE("mvn density point values") {
    CHECK(mvn_density({0.0, 0.0}, {0.0, 0.0}, Matrix::identity(2)) ==
          Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
    // |Sigma| = 0.75 and zero quadratic form at the mode; 2x2 inverse oracle
    const double det = 1.0 * 1.0 - 0.5 * 0.5;
    CHECK(mvn_density({0.0, 0.0}, {0.0, 0.0}, kExampleSigma) ==
          Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(det))).epsilon(1e-12));
    CHECK(mvn_density({0.0, 0.0}, {0.0, 0.0}, kExampleSigma) == Approx(0.1837762).margin(5e-8));
    // univariate normal pdf oracle
    CHECK(mvn_density({1.0}, {0.0}, Matrix::identity(1)) ==
          Approx(std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(mvn_density({1.0}, {0.0}, Matrix::identity(1)) == Approx(0.2419707).margin(5e-8));
}

TEST_CASE("mvn density quadratic form goes through a correlated sigma") {
    // oracle: direct 2x2 inverse
    const double x1 = 0.7, x2 = -0.4;
    const double det = 0.75;
    const double quad = (x1 * x1 - 2.0 * 0.5 * x1 * x2 + x2 * x2) / det;
    const double expected = std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
    CHECK(mvn_density({x1, x2}, {0.0, 0.0}, kExampleSigma) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("mvt density point values") {
    // at the mode with nu = 1, k = 2: Gamma(1.5)/(Gamma(0.5) pi) = 1/(2 pi)
    CHECK(mvt_density({0.0, 0.0}, {0.0, 0.0}, Matrix::identity(2), 1.0) ==
          Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
    // univariate nu = 1 is the standard Cauchy
    CHECK(mvt_density({0.0}, {0.0}, Matrix::identity(1), 1.0) ==
          Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(mvt_density({1.0}, {0.0}, Matrix::identity(1), 1.0) ==
          Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("truncated mvn density against the univariate closed form") {
    const TruncationBox box{{-1.5}, {1.5}};
    const double z = oracle::normal_cdf(1.5) - oracle::normal_cdf(-1.5);
    const double expected = oracle::normal_pdf(0.0) / z;  // ~0.4604681
    CHECK(tmvn_density({0.0}, {0.0}, Matrix::identity(1), box) == Approx(expected).margin(1e-10));
    CHECK(tmvn_density({0.0}, {0.0}, Matrix::identity(1), box) == Approx(0.4604681).margin(5e-8));
    // outside the box the density vanishes
    CHECK(tmvn_density({2.0}, {0.0}, Matrix::identity(1), box) == 0.0);
    CHECK(tmvn_density({2.0}, {0.0}, Matrix::identity(1), box, true) == kNegInf);
    // the boundary belongs to the closed box
    CHECK(tmvn_density({1.5}, {0.0}, Matrix::identity(1), box) > 0.0);
}

TEST_CASE("truncation increases the density inside the box") {
    const TruncationBox box{{-1.5, -1.5}, {1.5, 1.5}};
    const double plain = mvn_density({0.0, 0.0}, {0.0, 0.0}, kExampleSigma);
    const double truncated = tmvn_density({0.0, 0.0}, {0.0, 0.0}, kExampleSigma, box, false, {}, 1);
    CHECK(truncated > plain);
    // monotone effect across the box
    for (double x1 = -1.4; x1 <= 1.4; x1 += 0.7)
        for (double x2 = -1.4; x2 <= 1.4; x2 += 0.7)
            CHECK(tmvn_density({x1, x2}, {0.0, 0.0}, kExampleSigma, box, false, {}, 1) >
                  mvn_density({x1, x2}, {0.0, 0.0}, kExampleSigma));
}

TEST_CASE("truncated mvt density against the truncated Cauchy closed form") {
    const TruncationBox box{{-1.5}, {1.5}};
    const double z = oracle::cauchy_cdf(1.5) - oracle::cauchy_cdf(-1.5);  // 2 atan(1.5)/pi
    CHECK(z == Approx(2.0 * std::atan(1.5) / std::numbers::pi).epsilon(1e-14));
    const double expected = (1.0 / std::numbers::pi) / z;  // ~0.5087524
    CHECK(tmvt_density({0.0}, {0.0}, Matrix::identity(1), 1.0, box) ==
          Approx(expected).margin(1e-10));
    CHECK(tmvt_density({2.0}, {0.0}, Matrix::identity(1), 1.0, box) == 0.0);
}

TEST_CASE("a whole-space truncation box is vacuous") {
    const TruncationBox box{{kNegInf, kNegInf}, {kPosInf, kPosInf}};
    for (double x1 : {-1.0, 0.0, 2.0}) {
        const double truncated =
            tmvt_density({x1, 0.3}, {0.0, 0.0}, kExampleSigma, 3.0, box, false, {}, 1);
        const double plain = mvt_density({x1, 0.3}, {0.0, 0.0}, kExampleSigma, 3.0);
        CHECK(truncated == Approx(plain).epsilon(1e-12));
    }
}

TEST_CASE("log and linear densities agree") {
    for (double x1 = -2.0; x1 <= 2.0; x1 += 0.5) {
        const std::vector<double> x{x1, 0.25};
        CHECK(std::exp(mvn_density(x, {0.0, 0.0}, kExampleSigma, true)) ==
              Approx(mvn_density(x, {0.0, 0.0}, kExampleSigma)).epsilon(1e-12));
        CHECK(std::exp(mvt_density(x, {0.0, 0.0}, kExampleSigma, 2.5, true)) ==
              Approx(mvt_density(x, {0.0, 0.0}, kExampleSigma, 2.5)).epsilon(1e-12));
    }
    const TruncationBox box{{-1.5, -1.5}, {1.5, 1.5}};
    NormalizingCache cache;
    CHECK(std::exp(tmvn_density({0.3, 0.1}, {0.0, 0.0}, kExampleSigma, box, true, {}, 1, &cache)) ==
          Approx(tmvn_density({0.3, 0.1}, {0.0, 0.0}, kExampleSigma, box, false, {}, 1, &cache))
              .epsilon(1e-12));
}

TEST_CASE("mvt density approaches the mvn density as nu grows") {
    // the relative gap at nu = 1e6 is ~quad^2/(4 nu); the unit scale keeps the
    // worst grid corner inside the 1e-4 band
    const Matrix sigma = Matrix::identity(2);
    for (double x1 = -3.0; x1 <= 3.0; x1 += 0.5)
        for (double x2 = -3.0; x2 <= 3.0; x2 += 0.5) {
            const std::vector<double> x{x1, x2};
            const double t = mvt_density(x, {0.0, 0.0}, sigma, 1e6);
            const double n = mvn_density(x, {0.0, 0.0}, sigma);
            CHECK(t == Approx(n).epsilon(1e-4));
        }
}

TEST_CASE("desk-scale normalization by the trapezoid rule") {
    // untruncated over [-8, 8]^2
    {
        const double h = 0.05;
        const int n = static_cast<int>(std::lround(16.0 / h));
        double sum = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double w = ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
                sum += w * mvn_density({-8.0 + i * h, -8.0 + j * h}, {0.0, 0.0}, kExampleSigma);
            }
        CHECK(sum * h * h == Approx(1.0).margin(1e-4));
    }
    // truncated over its own box
    {
        const TruncationBox box{{-1.5, -1.5}, {1.5, 1.5}};
        NormalizingCache cache;
        const double h = 0.01;
        const int n = static_cast<int>(std::lround(3.0 / h));
        double sum = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double w = ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
                sum += w * tmvn_density({-1.5 + i * h, -1.5 + j * h}, {0.0, 0.0}, kExampleSigma,
                                        box, false, {}, 1, &cache);
            }
        CHECK(sum * h * h == Approx(1.0).margin(1e-4));
    }
}

TEST_CASE("degenerate truncation boxes are rejected") {
    const TruncationBox far_box{{40.0}, {41.0}};
    CHECK_THROWS_AS(tmvn_density({40.5}, {0.0}, Matrix::identity(1), far_box), DegenerateTruncation);
}

TEST_CASE("the normalizing cache is consulted on repeat evaluations") {
    const TruncationBox box{{-1.0, -1.0}, {1.0, 1.0}};
    NormalizingCache cache;
    int calls = 0;
    const auto probe = [&] {
        ++calls;
        return ProbabilityEstimate{0.5, 0.01};
    };
    const auto key = detail::normalizing_key({0.0, 0.0}, kExampleSigma, std::nullopt, box, {}, 1);
    CHECK(cache.get_or_compute(key, probe).value == 0.5);
    CHECK(cache.get_or_compute(key, probe).value == 0.5);
    CHECK(calls == 1);
    // a different seed is a different key
    const auto key2 = detail::normalizing_key({0.0, 0.0}, kExampleSigma, std::nullopt, box, {}, 2);
    CHECK(cache.get_or_compute(key2, probe).value == 0.5);
    CHECK(calls == 2);
}
