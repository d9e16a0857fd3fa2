#include <gtest/gtest.h>

#include "albatch/random.hpp"
#include "albatch/regression.hpp"
#include "oracles.hpp"

using namespace albatch;

namespace {

oracle::Rows rows_of(const Matrix& m) {
    oracle::Rows r(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) r[i].assign(m.row(i).begin(), m.row(i).end());
    return r;
}

double rel_err(const RidgeModel& m, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        num += (m.weights[j] - ref[j]) * (m.weights[j] - ref[j]);
        den += ref[j] * ref[j];
    }
    num += (m.bias - ref.back()) * (m.bias - ref.back());
    den += ref.back() * ref.back();
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace

TEST(Ridge, MatchesPseudoInverseOracle) {
    Rng rng(3);
    std::normal_distribution<double> g;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + rng() % 30, d = 1 + rng() % 12;
        Matrix x(n, d);
        for (auto& v : x.data()) v = g(rng);
        std::vector<double> y(n);
        for (auto& v : y) v = g(rng);
        const auto m = ridge_fit(x, y, 0.01);
        EXPECT_LT(rel_err(m, oracle::ridge_pinv(rows_of(x), y, 0.01)), 1e-8);
    }
}

TEST(Ridge, RankDeficientDuplicateColumns) {
    Matrix x{{1, 1, 2}, {2, 2, 0}, {3, 3, 1}, {4, 4, 5}};
    std::vector<double> y{1, 2, 2, 5};
    const auto m = ridge_fit(x, y, 0.01);
    EXPECT_NEAR(m.weights[0], m.weights[1], 1e-10);
    EXPECT_LT(rel_err(m, oracle::ridge_pinv(rows_of(x), y, 0.01)), 1e-8);
}

TEST(Ridge, NearExactFitOnLinearData) {
    Matrix x{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}};
    std::vector<double> y;
    for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(2 * x(i, 0) - x(i, 1) + 0.5);
    const auto m = ridge_fit(x, y, 1e-12);
    EXPECT_NEAR(m.weights[0], 2.0, 1e-8);
    EXPECT_NEAR(m.weights[1], -1.0, 1e-8);
    EXPECT_NEAR(m.bias, 0.5, 1e-8);
    EXPECT_LT(rmse(y, predict(m, x)), 1e-8);
}

TEST(Ridge, SingleSampleIsFinite) {
    Matrix x{{1, 2, 3}};
    std::vector<double> y{4};
    const auto m = ridge_fit(x, y);
    EXPECT_TRUE(std::isfinite(m.bias));
    EXPECT_NEAR(predict_one(m, x.row(0)), 4.0, 0.01);
}

TEST(Ridge, RejectsBadInput) {
    Matrix x{{1}, {2}};
    std::vector<double> y{1};
    EXPECT_THROW(ridge_fit(x, y), std::invalid_argument);
    std::vector<double> y2{1, NAN};
    EXPECT_THROW(ridge_fit(x, y2), std::invalid_argument);
    std::vector<double> y3{1, 2};
    EXPECT_THROW(ridge_fit(x, y3, -1.0), std::invalid_argument);
}

TEST(Metrics, RmseAndPearson) {
    std::vector<double> a{1, 2, 3}, b{1, 2, 4};
    EXPECT_NEAR(rmse(a, b), std::sqrt(1.0 / 3.0), 1e-15);
    const auto cc = pearson_cc(a, b);
    EXPECT_NEAR(cc.value, 0.98198, 1e-5);
    EXPECT_FALSE(cc.degenerate);
    std::vector<double> flat{2, 2, 2};
    const auto d = pearson_cc(a, flat);
    EXPECT_TRUE(d.degenerate);
    EXPECT_EQ(d.value, 0.0);
    EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}
