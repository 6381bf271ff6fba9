#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <mvdist/sampling.hpp>

#include "oracles.hpp"

using namespace mvdist;

namespace {

Matrix equicorrelated(std::size_t k, double rho) {
    Matrix m(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = i == j ? 1.0 : rho;
    return m;
}

std::vector<double> column_means(const Matrix& draws) {
    std::vector<double> mean(draws.cols(), 0.0);
    for (std::size_t i = 0; i < draws.rows(); ++i)
        for (std::size_t j = 0; j < draws.cols(); ++j) mean[j] += draws(i, j);
    for (auto& m : mean) m /= static_cast<double>(draws.rows());
    return mean;
}

Matrix sample_covariance(const Matrix& draws) {
    const auto mean = column_means(draws);
    const std::size_t k = draws.cols();
    Matrix cov(k, k);
    for (std::size_t i = 0; i < draws.rows(); ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                cov(a, b) += (draws(i, a) - mean[a]) * (draws(i, b) - mean[b]);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) cov(a, b) /= static_cast<double>(draws.rows() - 1);
    return cov;
}

double ks_statistic_vs_normal(std::vector<double> values, double mean, double sd) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = oracle::normal_cdf((values[i] - mean) / sd);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace

TEST_CASE("identical seed reproduces samples bit for bit") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const auto a = sample_mvn(100, {1.0, 2.0}, sigma, FactorizationMethod::Cholesky, 99);
    const auto b = sample_mvn(100, {1.0, 2.0}, sigma, FactorizationMethod::Cholesky, 99);
    CHECK(a.draws == b.draws);
    const auto c = sample_mvn(100, {1.0, 2.0}, sigma, FactorizationMethod::Cholesky, 100);
    CHECK_FALSE(a.draws == c.draws);
    const auto t1 = sample_mvt(50, {0.0, 0.0}, sigma, 5.0, FactorizationMethod::Eigen, 4);
    const auto t2 = sample_mvt(50, {0.0, 0.0}, sigma, 5.0, FactorizationMethod::Eigen, 4);
    CHECK(t1.draws == t2.draws);
}

TEST_CASE("mvn sample moments at CLT scale") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const std::size_t n = 100000;
    const auto sample = sample_mvn(n, {1.0, 2.0}, sigma, FactorizationMethod::Cholesky, 2024);
    const auto mean = column_means(sample.draws);
    CHECK(mean[0] == Approx(1.0).margin(0.02));
    CHECK(mean[1] == Approx(2.0).margin(0.02));
    const Matrix cov = sample_covariance(sample.draws);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) CHECK(cov(a, b) == Approx(sigma(a, b)).margin(0.03));
}

TEST_CASE("standard normal draws pass a KS check on most seeds") {
    const std::size_t n = 10000;
    const double critical = 1.6276 / std::sqrt(static_cast<double>(n));  // 1% level
    int passes = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto sample = sample_mvn(n, {0.0, 0.0}, equicorrelated(2, 0.5),
                                       FactorizationMethod::Cholesky, seed);
        bool ok = true;
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> column(n);
            for (std::size_t i = 0; i < n; ++i) column[i] = sample.draws(i, j);
            if (ks_statistic_vs_normal(std::move(column), 0.0, 1.0) >= critical) ok = false;
        }
        if (ok) ++passes;
    }
    CHECK(passes >= 95);
}

TEST_CASE("factorization methods agree in distribution") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const std::size_t n = 100000;
    std::vector<Matrix> covs;
    for (auto method : {FactorizationMethod::Cholesky, FactorizationMethod::Eigen,
                        FactorizationMethod::Svd}) {
        const auto sample = sample_mvn(n, {0.0, 0.0}, sigma, method, 31);
        const auto mean = column_means(sample.draws);
        CHECK(mean[0] == Approx(0.0).margin(0.02));
        CHECK(mean[1] == Approx(0.0).margin(0.02));
        covs.push_back(sample_covariance(sample.draws));
    }
    for (const auto& cov : covs)
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) CHECK(cov(a, b) == Approx(sigma(a, b)).margin(0.03));
}

TEST_CASE("mvt sample covariance carries the nu/(nu-2) factor") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const double nu = 10.0;
    const std::size_t n = 200000;
    const auto sample = sample_mvt(n, {0.0, 0.0}, sigma, nu, FactorizationMethod::Cholesky, 555);
    const Matrix cov = sample_covariance(sample.draws);
    const double factor = nu / (nu - 2.0);  // 1.25
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            CHECK(cov(a, b) == Approx(factor * sigma(a, b)).margin(0.05));
}

TEST_CASE("huge nu makes the t sampler look normal") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const std::size_t n = 100000;
    const auto t = sample_mvt(n, {0.0, 0.0}, sigma, 1e6, FactorizationMethod::Cholesky, 8);
    const auto g = sample_mvn(n, {0.0, 0.0}, sigma, FactorizationMethod::Cholesky, 8);
    const auto mt = column_means(t.draws);
    const auto mg = column_means(g.draws);
    const Matrix ct = sample_covariance(t.draws);
    const Matrix cg = sample_covariance(g.draws);
    for (std::size_t j = 0; j < 2; ++j) CHECK(mt[j] == Approx(mg[j]).margin(0.02));
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) CHECK(ct(a, b) == Approx(cg(a, b)).margin(0.03));
}

TEST_CASE("a whole-space box leaves rejection sampling untouched") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const TruncationBox all{{kNegInf, kNegInf}, {kPosInf, kPosInf}};
    const auto plain = sample_mvn(200, {0.0, 0.0}, sigma, FactorizationMethod::Cholesky, 12);
    const auto kept = sample_tmvn(200, {0.0, 0.0}, sigma, all, FactorizationMethod::Cholesky, 12);
    CHECK(plain.draws == kept.draws);
    const auto plain_t = sample_mvt(200, {0.0, 0.0}, sigma, 5.0, FactorizationMethod::Cholesky, 12);
    const auto kept_t =
        sample_tmvt(200, {0.0, 0.0}, sigma, 5.0, all, FactorizationMethod::Cholesky, 12);
    CHECK(plain_t.draws == kept_t.draws);
}

TEST_CASE("truncated draws land in the closed box") {
    const Matrix sigma = equicorrelated(2, 0.5);
    const TruncationBox box{{1.5, 1.5}, {2.5, 2.5}};
    const auto sample =
        sample_tmvn(10000, {2.0, 2.0}, sigma, box, FactorizationMethod::Cholesky, 77);
    for (std::size_t i = 0; i < sample.draws.rows(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(sample.draws(i, j) >= 1.5);
            CHECK(sample.draws(i, j) <= 2.5);
        }
    const TruncationBox box_neg{{-2.5, -2.5}, {-1.5, -1.5}};
    const auto mixture_component =
        sample_tmvt(5000, {-2.0, -2.0}, sigma, 5.0, box_neg, FactorizationMethod::Cholesky, 78);
    for (std::size_t i = 0; i < mixture_component.draws.rows(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(mixture_component.draws(i, j) >= -2.5);
            CHECK(mixture_component.draws(i, j) <= -1.5);
        }
}

TEST_CASE("symmetric truncation keeps the mean at zero") {
    const TruncationBox box{{-1.5}, {1.5}};
    const auto sample =
        sample_tmvn(100000, {0.0}, Matrix::identity(1), box, FactorizationMethod::Cholesky, 41);
    const auto mean = column_means(sample.draws);
    CHECK(mean[0] == Approx(0.0).margin(0.01));
}

TEST_CASE("truncated Cauchy draws are median-symmetric") {
    const TruncationBox box{{-1.5}, {1.5}};
    const auto sample = sample_tmvt(100000, {0.0}, Matrix::identity(1), 1.0, box,
                                    FactorizationMethod::Cholesky, 43);
    std::size_t below = 0;
    for (std::size_t i = 0; i < sample.draws.rows(); ++i)
        if (sample.draws(i, 0) <= 0.0) ++below;
    CHECK(static_cast<double>(below) / static_cast<double>(sample.draws.rows()) ==
          Approx(0.5).margin(0.01));
}

TEST_CASE("hopeless boxes exhaust the proposal budget") {
    const TruncationBox far_box{{30.0}, {31.0}};
    bool threw = false;
    try {
        sample_tmvn(10, {0.0}, Matrix::identity(1), far_box, FactorizationMethod::Cholesky, 1,
                    20000);
    } catch (const AcceptanceTooLow& e) {
        threw = true;
        CHECK(e.acceptance_rate() == 0.0);
    }
    CHECK(threw);
}

TEST_CASE("sampler input validation") {
    CHECK_THROWS_AS(sample_mvn(0, {0.0}, Matrix::identity(1)), DomainError);
    CHECK_THROWS_AS(sample_mvt(10, {0.0}, Matrix::identity(1), -1.0), InvalidDf);
    CHECK_THROWS_AS(sample_tmvn(10, {0.0}, Matrix::identity(1), TruncationBox{{1.0}, {0.0}}),
                    InvalidBounds);
}
