#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "albatch/linalg.hpp"

namespace albatch {

inline constexpr double kDefaultRidge = 0.01;

struct RidgeModel {
    std::vector<double> weights;
    double bias = 0.0;
    double sigma = kDefaultRidge;
};

/// Ridge regression on the augmented design [X 1]. The bias is penalized along
/// with the weights, so (A^T A + sigma I) is SPD for any X once sigma > 0.
/// With `intercept == false` the constant column is omitted and bias stays 0.
inline RidgeModel ridge_fit(const Matrix& x, std::span<const double> y, double sigma = kDefaultRidge,
                            bool intercept = true) {
    const std::size_t n = x.rows(), d = x.cols();
    if (n < 1 || d < 1) throw std::invalid_argument("ridge_fit: empty design");
    if (y.size() != n) throw std::invalid_argument("ridge_fit: target length mismatch");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("ridge_fit: sigma must be >= 0");
    if (!x.all_finite()) throw std::invalid_argument("ridge_fit: non-finite feature");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("ridge_fit: non-finite target");

    const std::size_t p = intercept ? d + 1 : d;
    Matrix gram(p, p);
    std::vector<double> rhs(p, 0.0);
    std::vector<double> a(p, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        std::copy(xi.begin(), xi.end(), a.begin());
        for (std::size_t r = 0; r < p; ++r) {
            rhs[r] += a[r] * y[i];
            for (std::size_t c = 0; c <= r; ++c) gram(r, c) += a[r] * a[c];
        }
    }
    for (std::size_t r = 0; r < p; ++r) {
        gram(r, r) += sigma;
        for (std::size_t c = 0; c < r; ++c) gram(c, r) = gram(r, c);
    }

    auto w = spd_solve(gram, rhs);
    RidgeModel model;
    model.sigma = sigma;
    model.bias = intercept ? w[d] : 0.0;
    w.resize(d);
    model.weights = std::move(w);
    return model;
}

inline double predict_one(const RidgeModel& model, std::span<const double> x) {
    return dot(x, model.weights) + model.bias;
}

inline std::vector<double> predict(const RidgeModel& model, const Matrix& x) {
    if (x.cols() != model.weights.size()) throw std::invalid_argument("predict: dimension mismatch");
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_one(model, x.row(i));
    return out;
}

inline double rmse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty()) throw std::invalid_argument("rmse: length mismatch or empty");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

struct Correlation {
    double value = 0.0;
    bool degenerate = false;  // one side constant; value forced to 0
};

inline Correlation pearson_cc(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.size() < 2) throw std::invalid_argument("pearson_cc: need equal lengths >= 2");
    const auto n = static_cast<double>(y.size());
    double my = 0.0, mh = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        my += y[i];
        mh += yhat[i];
    }
    my /= n;
    mh /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = y[i] - my, b = yhat[i] - mh;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return {0.0, true};
    return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

}  // namespace albatch
