#include <gtest/gtest.h>

#include <random>

#include "albatch/clustering.hpp"
#include "oracles.hpp"

using namespace albatch;

namespace {

Matrix two_blobs(std::size_t per, Rng& rng) {
    std::normal_distribution<double> g(0.0, 0.1);
    Matrix x(2 * per, 2);
    for (std::size_t i = 0; i < 2 * per; ++i) {
        const double c = i < per ? 0.0 : 10.0;
        x(i, 0) = c + g(rng);
        x(i, 1) = c + g(rng);
    }
    return x;
}

}  // namespace

TEST(KMeans, TwoBlobRecovery) {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        const auto x = two_blobs(25, rng);
        const auto cl = kmeans(x, 2, static_cast<std::uint64_t>(t));
        EXPECT_TRUE(cl.converged);
        const auto a = cl.assignments[0];
        for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(cl.assignments[i], i < 25 ? a : 1 - a);
        EXPECT_EQ(cl.sizes[0], 25u);
    }
}

TEST(KMeans, InertiaNeverIncreases) {
    Rng rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng() % 60, d = 1 + rng() % 5, k = 1 + rng() % std::min<std::size_t>(n, 8);
        Matrix x(n, d);
        for (auto& v : x.data()) v = u(rng);
        const auto cl = kmeans(x, k, rng());
        for (std::size_t i = 1; i < cl.inertia_history.size(); ++i)
            EXPECT_LE(cl.inertia_history[i], cl.inertia_history[i - 1] + 1e-12);
        for (auto s : cl.sizes) EXPECT_GT(s, 0u);
    }
}

TEST(KMeans, DuplicatePointsAndEdgeCases) {
    const Matrix x{{1, 1}, {1, 1}, {1, 1}, {5, 5}};
    const auto cl = kmeans(x, 2, 0);
    EXPECT_EQ(cl.assignments[0], cl.assignments[2]);
    EXPECT_NE(cl.assignments[0], cl.assignments[3]);
    EXPECT_NEAR(cl.inertia, 0.0, 1e-15);
    EXPECT_THROW(kmeans(x, 5, 0), std::invalid_argument);
    EXPECT_THROW(kmeans(x, 0, 0), std::invalid_argument);
    // only two distinct locations: extra clusters may stay empty, inertia is still 0
    const auto four = kmeans(x, 4, 3);
    EXPECT_NEAR(four.inertia, 0.0, 1e-15);
    EXPECT_EQ(four.assignments[0], four.assignments[1]);
}

TEST(KMeans, SeededDeterminism) {
    Rng rng(4);
    const auto x = two_blobs(30, rng);
    EXPECT_EQ(kmeans(x, 3, 9).assignments, kmeans(x, 3, 9).assignments);
}

TEST(ClosestToCentroid, MatchesBruteForce) {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        Matrix x(40, 3);
        for (auto& v : x.data()) v = u(rng);
        const auto cl = kmeans(x, 4, rng());
        oracle::Rows rows(40);
        for (std::size_t i = 0; i < 40; ++i) rows[i].assign(x.row(i).begin(), x.row(i).end());
        for (std::size_t c = 0; c < 4; ++c) {
            const auto centre = std::vector<double>(cl.centroids.row(c).begin(), cl.centroids.row(c).end());
            EXPECT_EQ(closest_to_centroid(x, cl, c), oracle::brute_closest(rows, cl.members(c), centre));
        }
    }
}
