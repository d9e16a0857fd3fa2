#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "albatch/csv.hpp"
#include "albatch/dataset.hpp"
#include "albatch/linalg.hpp"

namespace albatch {

// ---------------------------------------------------------------------------
// Drowsiness target

/// Maps a lane-departure response time to a drowsiness index in [0,1):
/// max(0, (1 - e^-(tau-tau0)) / (1 + e^-(tau-tau0))), evaluated as tanh((tau-tau0)/2).
inline double drowsiness_index(double tau, double tau0 = 1.0) {
    if (!std::isfinite(tau) || !std::isfinite(tau0)) throw std::invalid_argument("drowsiness_index: non-finite input");
    if (tau < 0.0) throw std::invalid_argument("drowsiness_index: negative response time");
    return std::max(0.0, std::tanh(0.5 * (tau - tau0)));
}

/// Trailing moving average; the first window-1 outputs average the available prefix.
inline std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
    if (series.empty()) throw std::invalid_argument("moving_average: empty series");
    if (window < 1 || window > series.size()) throw std::invalid_argument("moving_average: bad window");
    std::vector<double> out(series.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += series[i];
        if (i >= window) sum -= series[i - window];
        out[i] = sum / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Band power -> feature matrix

struct BandPowerTable {
    Matrix powers;  // epochs x channels, linear units
    std::vector<std::string> channel_names;
};

inline Matrix to_db(const BandPowerTable& table) {
    Matrix out(table.powers.rows(), table.powers.cols());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) {
            const double p = table.powers(i, j);
            if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("to_db: power must be positive and finite");
            out(i, j) = 10.0 * std::log10(p);
        }
    return out;
}

struct ChannelSelection {
    Matrix kept;
    std::vector<std::size_t> kept_channels;
    std::vector<std::size_t> rejected_channels;
};

/// Drops every channel whose maximum exceeds `max_db` (strictly).
inline ChannelSelection reject_channels(const Matrix& db, double max_db = 20.0) {
    if (db.cols() == 0) throw std::invalid_argument("reject_channels: no channels");
    ChannelSelection sel;
    for (std::size_t j = 0; j < db.cols(); ++j) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < db.rows(); ++i) peak = std::max(peak, db(i, j));
        (peak > max_db ? sel.rejected_channels : sel.kept_channels).push_back(j);
    }
    if (sel.kept_channels.empty()) throw std::invalid_argument("reject_channels: every channel rejected");
    sel.kept = Matrix(db.rows(), sel.kept_channels.size());
    for (std::size_t i = 0; i < db.rows(); ++i)
        for (std::size_t c = 0; c < sel.kept_channels.size(); ++c) sel.kept(i, c) = db(i, sel.kept_channels[c]);
    return sel;
}

struct Standardized {
    Matrix z;
    std::vector<double> mean;
    std::vector<double> sd;  // population standard deviation
};

inline Standardized zscore_columns(const Matrix& x) {
    if (x.rows() == 0) throw std::invalid_argument("zscore_columns: no rows");
    const auto n = static_cast<double>(x.rows());
    Standardized s{Matrix(x.rows(), x.cols()), std::vector<double>(x.cols()), std::vector<double>(x.cols())};
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) m += x(i, j);
        m /= n;
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - m) * (x(i, j) - m);
        const double sd = std::sqrt(ss / n);
        if (!(sd > 0.0)) throw std::invalid_argument("zscore_columns: constant column " + std::to_string(j));
        s.mean[j] = m;
        s.sd[j] = sd;
        for (std::size_t i = 0; i < x.rows(); ++i) s.z(i, j) = (x(i, j) - m) / sd;
    }
    return s;
}

struct PcaModel {
    std::vector<double> mean;
    Matrix components;  // d x q, orthonormal columns
    std::vector<double> explained_variance;
    double variance_ratio_kept = 0.0;
    double total_variance = 0.0;
};

/// Principal components of the column covariance, keeping the fewest leading
/// components whose cumulative variance ratio reaches `variance_threshold`.
inline PcaModel pca_fit(const Matrix& z, double variance_threshold = 0.95) {
    const std::size_t n = z.rows(), d = z.cols();
    if (d < 1 || n <= d) throw std::invalid_argument("pca_fit: need more rows than columns");
    if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
        throw std::invalid_argument("pca_fit: threshold must be in (0,1]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += z(i, j);
    for (auto& m : model.mean) m /= static_cast<double>(n);

    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            const double da = z(i, a) - model.mean[a];
            for (std::size_t b = 0; b <= a; ++b) cov(a, b) += da * (z(i, b) - model.mean[b]);
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            cov(a, b) /= static_cast<double>(n - 1);
            cov(b, a) = cov(a, b);
        }

    auto eig = sym_eig(cov);
    for (auto& v : eig.values) v = std::max(v, 0.0);  // round-off on singular covariances
    double total = 0.0;
    for (double v : eig.values) total += v;
    if (!(total > 0.0)) throw std::invalid_argument("pca_fit: zero total variance");

    std::size_t q = 0;
    double cum = 0.0;
    while (q < d) {
        cum += eig.values[q++];
        if (cum / total >= variance_threshold * (1.0 - 1e-12)) break;
    }

    model.components = Matrix(d, q);
    model.explained_variance.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(q));
    for (std::size_t c = 0; c < q; ++c) {
        std::size_t arg = 0;
        for (std::size_t r = 1; r < d; ++r)
            if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(arg, c))) arg = r;
        const double sign = eig.vectors(arg, c) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < d; ++r) model.components(r, c) = sign * eig.vectors(r, c);
    }
    model.variance_ratio_kept = std::min(1.0, cum / total);
    model.total_variance = total;
    return model;
}

/// Raw principal-component scores (Z - mean) * components.
inline Matrix pca_scores(const PcaModel& model, const Matrix& z) {
    if (z.cols() != model.mean.size()) throw std::invalid_argument("pca_scores: column count mismatch");
    Matrix centred = z;
    for (std::size_t i = 0; i < centred.rows(); ++i)
        for (std::size_t j = 0; j < centred.cols(); ++j) centred(i, j) -= model.mean[j];
    return centred * model.components;
}

/// Min-max scales each column of `scores` to [0,1] using its own range.
inline Matrix minmax_columns(Matrix scores) {
    for (std::size_t j = 0; j < scores.cols(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < scores.rows(); ++i) {
            lo = std::min(lo, scores(i, j));
            hi = std::max(hi, scores(i, j));
        }
        if (!(hi > lo)) throw std::invalid_argument("minmax_columns: zero-range column " + std::to_string(j));
        for (std::size_t i = 0; i < scores.rows(); ++i)
            scores(i, j) = std::clamp((scores(i, j) - lo) / (hi - lo), 0.0, 1.0);
    }
    return scores;
}

inline Matrix project_and_scale(const PcaModel& model, const Matrix& z) {
    return minmax_columns(pca_scores(model, z));
}

// ---------------------------------------------------------------------------
// File-level pipeline: band powers + response times -> Dataset

struct FeaturePipelineOptions {
    double tau0 = 1.0;
    std::size_t smoothing_window = 9;  // 90 s at one sample per 10 s
    double max_db = 20.0;
    double variance_threshold = 0.95;
};

struct EpochSeries {
    std::vector<SampleId> epochs;
    std::vector<double> values;
};

/// `epoch,ch_<name>...`
inline std::pair<std::vector<SampleId>, BandPowerTable> load_band_powers(const std::string& path) {
    const auto t = csv::read(path);
    if (t.header.empty() || t.header[0] != "epoch") throw InputError(path + ": first column must be 'epoch'");
    BandPowerTable table;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        const auto& h = t.header[c];
        if (h.rfind("ch_", 0) != 0) throw InputError(path + ": channel column '" + h + "' must start with 'ch_'");
        table.channel_names.push_back(h.substr(3));
    }
    if (table.channel_names.empty()) throw InputError(path + ": no channel columns");
    std::vector<SampleId> epochs;
    table.powers = Matrix(t.rows.size(), table.channel_names.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string ctx = path + " row " + std::to_string(r + 1);
        epochs.push_back(csv::parse_int(t.rows[r][0], ctx));
        for (std::size_t c = 1; c < t.header.size(); ++c) {
            const double p = csv::parse_double(t.rows[r][c], ctx);
            if (!(p > 0.0)) throw InputError(ctx + ": band power must be positive");
            table.powers(r, c - 1) = p;
        }
    }
    return {std::move(epochs), std::move(table)};
}

/// `epoch,tau`
inline EpochSeries load_response_times(const std::string& path) {
    const auto t = csv::read(path);
    if (t.column("epoch") != 0 || t.column("tau") != 1 || t.header.size() != 2)
        throw InputError(path + ": header must be 'epoch,tau'");
    EpochSeries s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string ctx = path + " row " + std::to_string(r + 1);
        s.epochs.push_back(csv::parse_int(t.rows[r][0], ctx));
        s.values.push_back(csv::parse_double(t.rows[r][1], ctx));
    }
    return s;
}

struct FeatureReport {
    Dataset data;
    std::vector<std::string> rejected_channels;
    PcaModel pca;
};

/// Runs dB conversion, channel rejection, z-scoring, PCA and [0,1] scaling on the
/// band powers, and the drowsiness mapping plus smoothing on the response times.
inline FeatureReport build_features(std::span<const SampleId> epochs, const BandPowerTable& powers,
                                    const EpochSeries& response, const FeaturePipelineOptions& opts = {}) {
    if (epochs.size() != powers.powers.rows()) throw std::invalid_argument("build_features: epoch count mismatch");
    if (!std::equal(epochs.begin(), epochs.end(), response.epochs.begin(), response.epochs.end()))
        throw InputError("band-power and response-time files must list the same epochs in the same order");

    std::vector<double> y(response.values.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = drowsiness_index(response.values[i], opts.tau0);
    y = moving_average(y, std::min(opts.smoothing_window, y.size()));

    const auto sel = reject_channels(to_db(powers), opts.max_db);
    const auto z = zscore_columns(sel.kept);
    FeatureReport report;
    report.pca = pca_fit(z.z, opts.variance_threshold);
    report.data.features = project_and_scale(report.pca, z.z);
    report.data.targets = std::move(y);
    report.data.ids.assign(epochs.begin(), epochs.end());
    for (auto c : sel.rejected_channels) report.rejected_channels.push_back(powers.channel_names[c]);
    return report;
}

}  // namespace albatch
