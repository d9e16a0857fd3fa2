#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "albatch/linalg.hpp"
#include "albatch/random.hpp"
#include "albatch/regression.hpp"

namespace albatch {

inline constexpr std::size_t kDefaultCommitteeSize = 4;

/// N x P matrix: row n holds the P committee predictions for candidate n.
struct CommitteePredictions {
    Matrix preds;

    std::size_t size() const noexcept { return preds.rows(); }
    std::size_t members() const noexcept { return preds.cols(); }
};

/// Fits P ridge models on with-replacement resamples of the labeled set.
/// A resample with fewer than two distinct points is redrawn up to 10 times,
/// after which it is accepted as is.
inline std::vector<RidgeModel> bootstrap_committee(const Matrix& x, std::span<const double> y, std::size_t p,
                                                   double sigma, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (n < 2) throw std::invalid_argument("bootstrap_committee: need at least 2 labeled samples");
    if (p < 2) throw std::invalid_argument("bootstrap_committee: committee size must be >= 2");
    if (y.size() != n) throw std::invalid_argument("bootstrap_committee: target length mismatch");

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<RidgeModel> models;
    models.reserve(p);
    std::vector<std::size_t> rows(n);
    std::vector<double> ys(n);
    for (std::size_t m = 0; m < p; ++m) {
        for (int attempt = 0; attempt < 10; ++attempt) {
            for (auto& r : rows) r = pick(rng);
            if (std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return r != rows[0]; })) break;
        }
        for (std::size_t i = 0; i < n; ++i) ys[i] = y[rows[i]];
        models.push_back(ridge_fit(x.select_rows(rows), ys, sigma));
    }
    return models;
}

inline CommitteePredictions committee_predict(std::span<const RidgeModel> models, const Matrix& x) {
    CommitteePredictions cp{Matrix(x.rows(), models.size())};
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t p = 0; p < models.size(); ++p) cp.preds(i, p) = predict_one(models[p], x.row(i));
    return cp;
}

namespace detail {
inline double row_mean(std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += v;
    return s / static_cast<double>(r.size());
}
}  // namespace detail

/// Query-by-committee disagreement: population variance of each row.
inline std::vector<double> qbc_scores(const CommitteePredictions& cp) {
    if (cp.members() < 2) throw std::invalid_argument("qbc_scores: committee size must be >= 2");
    std::vector<double> out(cp.size());
    for (std::size_t n = 0; n < cp.size(); ++n) {
        auto r = cp.preds.row(n);
        const double mean = detail::row_mean(r);
        double s = 0.0;
        for (double v : r) s += (v - mean) * (v - mean);
        out[n] = s / static_cast<double>(r.size());
    }
    return out;
}

/// Expected model change for linear models: mean |y_p - mean| times ||x_n||.
inline std::vector<double> emcm_scores(const CommitteePredictions& cp, const Matrix& x) {
    if (cp.size() != x.rows()) throw std::invalid_argument("emcm_scores: row count mismatch");
    if (cp.members() < 1) throw std::invalid_argument("emcm_scores: empty committee");
    std::vector<double> out(cp.size());
    for (std::size_t n = 0; n < cp.size(); ++n) {
        auto r = cp.preds.row(n);
        const double mean = detail::row_mean(r);
        double s = 0.0;
        for (double v : r) s += std::abs(v - mean);
        out[n] = s / static_cast<double>(r.size()) * norm2(x.row(n));
    }
    return out;
}

}  // namespace albatch
