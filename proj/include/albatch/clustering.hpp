#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "albatch/linalg.hpp"
#include "albatch/random.hpp"

namespace albatch {

struct Clustering {
    std::vector<std::size_t> assignments;
    Matrix centroids;  // k x d
    std::vector<std::size_t> sizes;
    double inertia = 0.0;
    // Inertia after the seeding assignment and after every update/assign step.
    std::vector<double> inertia_history;
    int iterations = 0;
    bool converged = false;

    std::size_t k() const noexcept { return centroids.rows(); }

    std::vector<std::size_t> members(std::size_t cluster) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == cluster) out.push_back(i);
        return out;
    }
};

struct KMeansOptions {
    int max_iterations = 100;
};

namespace detail {

/// Nearest centroid per point, ties to the lowest cluster id. Returns inertia.
inline double assign_points(const Matrix& x, const Matrix& c, std::vector<std::size_t>& assign) {
    assign.resize(x.rows());
    double inertia = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < c.rows(); ++j) {
            const double d = squared_distance(x.row(i), c.row(j));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        assign[i] = arg;
        inertia += best;
    }
    return inertia;
}

inline double inertia_of(const Matrix& x, const Matrix& c, const std::vector<std::size_t>& assign) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += squared_distance(x.row(i), c.row(assign[i]));
    return s;
}

inline std::vector<std::size_t> cluster_sizes(const std::vector<std::size_t>& assign, std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assign) ++sizes[a];
    return sizes;
}

inline void recompute_centroid(const Matrix& x, const std::vector<std::size_t>& assign, std::size_t cluster,
                               Matrix& c) {
    auto row = c.row(cluster);
    std::vector<double> sum(x.cols(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (assign[i] != cluster) continue;
        ++count;
        auto xi = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) sum[j] += xi[j];
    }
    if (count == 0) return;
    for (std::size_t j = 0; j < x.cols(); ++j) row[j] = sum[j] / static_cast<double>(count);
}

/// Moves centroids to their cluster means, then reseeds each empty cluster at the
/// point farthest from its own centroid (taken from a cluster with > 1 member).
inline void update_centroids(const Matrix& x, std::vector<std::size_t>& assign, Matrix& c) {
    const std::size_t k = c.rows();
    for (std::size_t j = 0; j < k; ++j) recompute_centroid(x, assign, j, c);
    auto sizes = cluster_sizes(assign, k);
    for (std::size_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] != 0) continue;
        double far = -1.0;
        std::size_t arg = x.rows();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (sizes[assign[i]] < 2) continue;
            const double d = squared_distance(x.row(i), c.row(assign[i]));
            if (d > far) {
                far = d;
                arg = i;
            }
        }
        if (arg == x.rows()) break;  // fewer points than clusters; cannot happen when k <= n
        const std::size_t donor = assign[arg];
        assign[arg] = empty;
        --sizes[donor];
        sizes[empty] = 1;
        auto dst = c.row(empty);
        auto src = x.row(arg);
        std::copy(src.begin(), src.end(), dst.begin());
        recompute_centroid(x, assign, donor, c);
    }
}

}  // namespace detail

/// k-means++ seeding: first centre uniform, the rest with probability
/// proportional to squared distance from the nearest chosen centre.
inline Matrix kmeanspp_seeds(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix c(k, x.cols());
    std::vector<char> chosen(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx, std::size_t slot) {
        chosen[idx] = 1;
        auto src = x.row(idx);
        std::copy(src.begin(), src.end(), c.row(slot).begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), src));
    };

    take(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng), 0);
    for (std::size_t slot = 1; slot < k; ++slot) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n;
        if (total > 0.0) {
            const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (d2[i] > 0.0 && r < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // r landed on the rounding tail
                for (std::size_t i = n; i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        } else {
            // every remaining point duplicates a centre; pick among the unchosen
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) rest.push_back(i);
            pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
        }
        take(pick, slot);
    }
    return c;
}

/// Lloyd iterations from the given centroids until assignments stop changing.
inline Clustering lloyd(const Matrix& x, Matrix centroids, KMeansOptions opts = {}) {
    if (centroids.cols() != x.cols()) throw std::invalid_argument("lloyd: dimension mismatch");
    if (centroids.rows() == 0 || centroids.rows() > x.rows()) throw std::invalid_argument("lloyd: need 1 <= k <= n");

    Clustering out;
    std::vector<std::size_t> assign;
    out.inertia_history.push_back(detail::assign_points(x, centroids, assign));

    std::vector<std::size_t> next;
    for (int it = 0; it < opts.max_iterations; ++it) {
        detail::update_centroids(x, assign, centroids);
        out.inertia_history.push_back(detail::inertia_of(x, centroids, assign));
        out.inertia_history.push_back(detail::assign_points(x, centroids, next));
        out.iterations = it + 1;
        if (next == assign) {
            out.converged = true;
            break;
        }
        assign.swap(next);
    }

    out.sizes = detail::cluster_sizes(assign, centroids.rows());
    out.inertia = detail::inertia_of(x, centroids, assign);
    out.assignments = std::move(assign);
    out.centroids = std::move(centroids);
    return out;
}

/// k-means with k-means++ seeding; deterministic for a fixed seed.
inline Clustering kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, KMeansOptions opts = {}) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > x.rows()) throw std::invalid_argument("kmeans: k exceeds the number of points");
    Rng rng(seed);
    return lloyd(x, kmeanspp_seeds(x, k, rng), opts);
}

/// Member of `cluster` nearest its centroid; ties go to the lowest point index.
inline std::size_t closest_to_centroid(const Matrix& x, const Clustering& c, std::size_t cluster) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = x.rows();
    for (std::size_t i = 0; i < c.assignments.size(); ++i) {
        if (c.assignments[i] != cluster) continue;
        const double d = squared_distance(x.row(i), c.centroids.row(cluster));
        if (d < best) {
            best = d;
            arg = i;
        }
    }
    if (arg == x.rows()) throw std::invalid_argument("closest_to_centroid: empty cluster");
    return arg;
}

}  // namespace albatch
