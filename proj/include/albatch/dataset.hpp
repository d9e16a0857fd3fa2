#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "albatch/csv.hpp"
#include "albatch/error.hpp"
#include "albatch/linalg.hpp"
#include "albatch/random.hpp"

namespace albatch {

using SampleId = std::int64_t;

/// A regression pool: N samples with d features, targets and stable ids.
struct Dataset {
    Matrix features;
    std::vector<double> targets;
    std::vector<SampleId> ids;

    std::size_t size() const noexcept { return targets.size(); }
    std::size_t dim() const noexcept { return features.cols(); }

    /// Throws std::invalid_argument if any invariant is broken.
    void validate() const {
        if (features.rows() != targets.size() || ids.size() != targets.size())
            throw std::invalid_argument("Dataset: features/targets/ids length mismatch");
        if (targets.empty()) throw std::invalid_argument("Dataset: no samples");
        if (features.cols() == 0) throw std::invalid_argument("Dataset: no feature columns");
        if (!features.all_finite() ||
            !std::all_of(targets.begin(), targets.end(), [](double v) { return std::isfinite(v); }))
            throw std::invalid_argument("Dataset: non-finite value");
    }

    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.features = features.select_rows(rows);
        out.targets.reserve(rows.size());
        out.ids.reserve(rows.size());
        for (auto r : rows) {
            out.targets.push_back(targets[r]);
            out.ids.push_back(ids[r]);
        }
        return out;
    }
};

/// Reads `[id,]f0,...,y`. A missing `id` column assigns ids 0..N-1.
inline Dataset load_csv(const std::string& path) {
    const auto table = csv::read(path);
    const auto ycol = table.column("y");
    if (ycol < 0) throw InputError(path + ": missing 'y' column");
    const auto idcol = table.column("id");

    std::vector<std::size_t> fcols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) != ycol && static_cast<std::ptrdiff_t>(c) != idcol) fcols.push_back(c);
    }
    if (fcols.empty()) throw InputError(path + ": no feature columns");
    if (table.rows.empty()) throw InputError(path + ": no data rows");

    Dataset ds;
    ds.features = Matrix(table.rows.size(), fcols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 1);
        for (std::size_t j = 0; j < fcols.size(); ++j) ds.features(r, j) = csv::parse_double(row[fcols[j]], ctx);
        ds.targets.push_back(csv::parse_double(row[static_cast<std::size_t>(ycol)], ctx));
        ds.ids.push_back(idcol >= 0 ? csv::parse_int(row[static_cast<std::size_t>(idcol)], ctx)
                                    : static_cast<SampleId>(r));
    }
    return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "id";
    for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
    out << ",y\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.ids[i];
        for (double v : ds.features.row(i)) out << ',' << csv::format_double(v);
        out << ',' << csv::format_double(ds.targets[i]) << '\n';
    }
    if (!out) throw InputError("write failed for '" + path + "'");
}

/// round(fraction * n), half-up.
inline std::size_t pool_size(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

/// Uniform random subset without replacement, in shuffled order.
inline Dataset draw_pool(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("draw_pool: fraction must be in (0,1]");
    const std::size_t m = pool_size(ds.size(), fraction);
    if (m == 0) throw std::invalid_argument("draw_pool: empty pool");

    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(m);
    return ds.subset(perm);
}

// ---------------------------------------------------------------------------
// Labeled / unlabeled / blacklisted bookkeeping for one strategy run.

class LabelState {
public:
    LabelState() = default;
    explicit LabelState(std::size_t n) : n_(n) {
        for (std::size_t i = 0; i < n; ++i) unlabeled_.insert(i);
    }

    std::size_t pool_size() const noexcept { return n_; }
    const std::vector<std::size_t>& labeled() const noexcept { return labeled_; }
    const std::set<std::size_t>& unlabeled() const noexcept { return unlabeled_; }
    const std::set<std::size_t>& blacklisted() const noexcept { return blacklisted_; }
    const std::vector<std::vector<std::size_t>>& batch_history() const noexcept { return history_; }

    bool is_unlabeled(std::size_t i) const { return unlabeled_.count(i) != 0; }

    /// Moves a batch from unlabeled to labeled and records it in the history.
    void label_batch(std::span<const std::size_t> batch) {
        for (auto i : batch) {
            if (unlabeled_.erase(i) == 0) throw std::logic_error("label_batch: index not unlabeled");
            labeled_.push_back(i);
        }
        history_.emplace_back(batch.begin(), batch.end());
    }

    /// Moves unlabeled samples to the blacklist. Labeled samples cannot be blacklisted.
    void blacklist(std::span<const std::size_t> idx) {
        for (auto i : idx) {
            if (blacklisted_.count(i)) continue;
            if (unlabeled_.erase(i) == 0) throw std::logic_error("blacklist: index not unlabeled");
            blacklisted_.insert(i);
        }
    }

    /// Partition and history checks; throws std::logic_error on violation.
    void validate() const {
        std::vector<int> seen(n_, 0);
        for (auto i : labeled_) {
            if (i >= n_) throw std::logic_error("LabelState: labeled index out of range");
            ++seen[i];
        }
        for (auto i : unlabeled_) {
            if (i >= n_) throw std::logic_error("LabelState: unlabeled index out of range");
            ++seen[i];
        }
        for (auto i : blacklisted_) {
            if (i >= n_) throw std::logic_error("LabelState: blacklisted index out of range");
            ++seen[i];
        }
        if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
            throw std::logic_error("LabelState: sets do not partition the pool");
        std::vector<std::size_t> flat;
        for (const auto& b : history_) flat.insert(flat.end(), b.begin(), b.end());
        if (flat != labeled_) throw std::logic_error("LabelState: batch history does not match labeled order");
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> labeled_;
    std::set<std::size_t> unlabeled_;
    std::set<std::size_t> blacklisted_;
    std::vector<std::vector<std::size_t>> history_;
};

// ---------------------------------------------------------------------------
// Synthetic subjects: a noisy linear target over uniform features plus planted
// outliers that sit in tight 1-2 point clusters far from the data.

struct SynthConfig {
    std::size_t n_samples = 360;
    std::size_t n_features = 10;
    double noise_sd = 0.1;
    double outlier_fraction = 0.02;
    double outlier_scale = 1.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_features < 1) throw InputError("synth: n_features must be >= 1");
        if (n_samples < n_features + 2) throw InputError("synth: n_samples must be >= n_features + 2");
        if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw InputError("synth: noise_sd must be >= 0");
        if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5))
            throw InputError("synth: outlier_fraction must be in [0, 0.5)");
        if (!(outlier_scale > 1.0) || !std::isfinite(outlier_scale))
            throw InputError("synth: outlier_scale must be > 1");
    }
};

struct SynthSubject {
    Dataset data;
    std::vector<double> weights;  // hidden generator, before target rescaling
    double bias = 0.0;
    std::vector<SampleId> outlier_ids;
};

inline SynthSubject synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_samples;
    const std::size_t d = cfg.n_features;
    Rng rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SynthSubject out;
    out.weights.resize(d);
    for (auto& w : out.weights) w = gauss(rng);
    out.bias = gauss(rng);

    Dataset& ds = out.data;
    ds.features = Matrix(n, d);
    ds.targets.resize(n);
    ds.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = unit(rng);
        ds.targets[i] = dot(ds.features.row(i), out.weights) + out.bias + cfg.noise_sd * gauss(rng);
        ds.ids[i] = static_cast<SampleId>(i);
    }
    const auto [lo, hi] = std::minmax_element(ds.targets.begin(), ds.targets.end());
    const double ymin = *lo, range = *hi - *lo;
    for (auto& y : ds.targets) y = range > 0.0 ? (y - ymin) / range : 0.0;

    const std::size_t n_out = pool_size(n, cfg.outlier_fraction);
    if (n_out > 0) {
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(n_out);
        std::sort(rows.begin(), rows.end());

        // Cluster centres lie outlier_scale half-diagonals from the cube centre
        // (never closer than outlier_scale), so every cluster is outside the cube.
        const double rootd = std::sqrt(static_cast<double>(d));
        const double dist = cfg.outlier_scale * std::max(1.0, rootd / 2.0) + 0.01 * rootd;
        std::uniform_real_distribution<double> jitter(-0.01, 0.01);
        std::vector<double> centre(d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i % 2 == 0) {
                double norm = 0.0;
                do {
                    for (auto& u : centre) u = gauss(rng);
                    norm = norm2(centre);
                } while (norm < 1e-12);
                for (auto& u : centre) u = 0.5 + dist * u / norm;
            }
            auto row = ds.features.row(rows[i]);
            for (std::size_t j = 0; j < d; ++j) row[j] = centre[j] + jitter(rng);
            out.outlier_ids.push_back(ds.ids[rows[i]]);
        }
    }
    return out;
}

}  // namespace albatch
