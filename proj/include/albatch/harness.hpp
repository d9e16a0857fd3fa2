#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "albatch/csv.hpp"
#include "albatch/dataset.hpp"
#include "albatch/regression.hpp"
#include "albatch/strategies.hpp"

namespace albatch {

inline const std::vector<std::string> kDefaultStrategies = {"bl",   "qbc",    "eqbc",   "emcm",
                                                            "eemcm", "eemcm1", "eemcm2", "eemcm3"};

struct ExperimentConfig {
    std::vector<std::string> strategies = kDefaultStrategies;
    std::size_t k = 5;
    std::size_t batches = 12;  // M
    double pool_fraction = 0.8;
    std::size_t runs = 30;
    std::uint64_t master_seed = 0;
    double sigma = kDefaultRidge;
    double gamma = 0.02;
    std::size_t committee_size = kDefaultCommitteeSize;
    std::size_t jobs = 1;

    std::vector<StrategySpec> specs() const {
        std::vector<StrategySpec> out;
        std::set<std::string> seen;
        for (const auto& name : strategies) {
            if (!seen.insert(name).second) throw InputError("strategy '" + name + "' listed twice");
            StrategySpec s;
            try {
                s = strategy_from_name(name);
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
            s.k = k;
            s.gamma = gamma;
            s.committee_size = committee_size;
            s.sigma = sigma;
            s.validate();
            out.push_back(std::move(s));
        }
        return out;
    }

    void validate() const {
        if (strategies.empty()) throw InputError("no strategies selected");
        if (k < 1) throw InputError("k must be >= 1");
        if (batches < 1) throw InputError("M must be >= 1");
        if (runs < 1) throw InputError("runs must be >= 1");
        if (!(pool_fraction > 0.0 && pool_fraction <= 1.0)) throw InputError("pool_fraction must be in (0,1]");
        if (!(sigma > 0.0)) throw InputError("sigma must be > 0");
        if (!(gamma >= 0.0 && gamma < 0.5)) throw InputError("gamma must be in [0,0.5)");
        if (committee_size < 2) throw InputError("P must be >= 2");
        if (jobs < 1) throw InputError("jobs must be >= 1");
        (void)specs();
    }
};

/// Bits of ResultRow::flags.
enum ResultFlag : unsigned {
    kCcDegenerate = 1u,  // constant predictions or targets; cc reported as 0
    kTrainOnly = 2u,     // nothing left unlabeled; metrics are on the labeled set
    kExhausted = 4u,     // no candidates left for this batch; previous model repeated
};

struct ResultRow {
    std::size_t subject = 0;
    std::string strategy;
    std::size_t run = 0;
    std::size_t m = 0;
    double rmse = 0.0;
    double cc = 0.0;
    unsigned flags = 0;
};

using ResultsTable = std::vector<ResultRow>;

struct Evaluation {
    double rmse;
    Correlation cc;
    bool train_only;
};

/// Scores a model on every pool sample outside `labeled`; if that set is empty
/// the labeled samples are used instead and flagged.
inline Evaluation evaluate_on_rest(const Dataset& pool, const RidgeModel& model,
                                   std::span<const std::size_t> labeled) {
    std::vector<char> is_labeled(pool.size(), 0);
    for (auto i : labeled) is_labeled[i] = 1;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (!is_labeled[i]) rest.push_back(i);

    const bool train_only = rest.empty();
    const std::vector<std::size_t> eval = train_only ? std::vector<std::size_t>(labeled.begin(), labeled.end()) : rest;
    std::vector<double> y, yhat;
    for (auto i : eval) {
        y.push_back(pool.targets[i]);
        yhat.push_back(predict_one(model, pool.features.row(i)));
    }
    Correlation cc{0.0, true};
    if (y.size() >= 2) cc = pearson_cc(y, yhat);
    return {rmse(y, yhat), cc, train_only};
}

/// Seed owning everything random in one (subject, run) unit.
inline std::uint64_t unit_seed(std::uint64_t master, std::size_t subject, std::size_t run) {
    return derive_seed(master, subject, run);
}

/// Executes every strategy on one freshly drawn pool and returns M rows per strategy.
inline std::vector<ResultRow> run_unit(const Dataset& subject_data, std::size_t subject, std::size_t run,
                                       const ExperimentConfig& cfg, std::span<const StrategySpec> specs) {
    const std::uint64_t seed = unit_seed(cfg.master_seed, subject, run);
    const Dataset pool = draw_pool(subject_data, cfg.pool_fraction, stream_seed(seed, "pool"));

    std::vector<ResultRow> rows;
    for (const auto& spec : specs) {
        const StrategyRun sr = run_strategy(pool, spec, cfg.batches, seed);
        sr.state.validate();
        std::vector<std::size_t> labeled;
        for (std::size_t m = 1; m <= cfg.batches; ++m) {
            ResultRow row{subject, spec.name, run, m};
            const std::size_t b = std::min(m, sr.batches.size());
            if (m <= sr.batches.size()) {
                const auto& chosen = sr.batches[m - 1].chosen;
                labeled.insert(labeled.end(), chosen.begin(), chosen.end());
            } else {
                row.flags |= kExhausted;
            }
            const auto ev = evaluate_on_rest(pool, sr.models[b - 1], labeled);
            row.rmse = ev.rmse;
            row.cc = ev.cc.value;
            if (ev.cc.degenerate) row.flags |= kCcDegenerate;
            if (ev.train_only) row.flags |= kTrainOnly;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

/// Full protocol: for each subject and run, draw a pool and evaluate every
/// strategy after each batch. Output order is (subject, strategy, run, m) with
/// strategies in configuration order, independent of `jobs`.
inline ResultsTable run_experiment(const ExperimentConfig& cfg, std::span<const Dataset> subjects) {
    cfg.validate();
    if (subjects.empty()) throw InputError("no subject datasets");
    for (const auto& s : subjects) s.validate();
    const auto specs = cfg.specs();

    const std::size_t units = subjects.size() * cfg.runs;
    std::vector<std::vector<ResultRow>> per_unit(units);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t u = next++; u < units; u = next++) {
            try {
                per_unit[u] = run_unit(subjects[u / cfg.runs], u / cfg.runs, u % cfg.runs, cfg, specs);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = units;
            }
        }
    };
    const std::size_t nthreads = std::min(cfg.jobs, units);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    ResultsTable table;
    table.reserve(units * specs.size() * cfg.batches);
    for (std::size_t s = 0; s < subjects.size(); ++s)
        for (std::size_t si = 0; si < specs.size(); ++si)
            for (std::size_t r = 0; r < cfg.runs; ++r) {
                const auto& rows = per_unit[s * cfg.runs + r];
                for (std::size_t m = 0; m < cfg.batches; ++m) table.push_back(rows[si * cfg.batches + m]);
            }
    return table;
}

// ---------------------------------------------------------------------------
// Results CSV: subject,strategy,run,m,rmse,cc,cc_flag

inline void write_results(const ResultsTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "subject,strategy,run,m,rmse,cc,cc_flag\n";
    for (const auto& r : t) {
        out << r.subject << ',' << r.strategy << ',' << r.run << ',' << r.m << ',' << csv::format_double(r.rmse)
            << ',' << csv::format_double(r.cc) << ',' << r.flags << '\n';
    }
    if (!out) throw InputError("write failed for '" + path + "'");
}

inline ResultsTable read_results(const std::string& path) {
    const auto t = csv::read(path);
    const char* names[] = {"subject", "strategy", "run", "m", "rmse", "cc", "cc_flag"};
    std::ptrdiff_t col[7];
    for (int i = 0; i < 7; ++i) {
        col[i] = t.column(names[i]);
        if (col[i] < 0) throw InputError(path + ": missing column '" + names[i] + "'");
    }
    ResultsTable rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& cells = t.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 1);
        auto cell = [&](int i) -> const std::string& { return cells[static_cast<std::size_t>(col[i])]; };
        ResultRow row;
        const auto subject = csv::parse_int(cell(0), ctx);
        const auto run = csv::parse_int(cell(2), ctx);
        const auto m = csv::parse_int(cell(3), ctx);
        const auto flags = csv::parse_int(cell(6), ctx);
        if (subject < 0 || run < 0 || m < 1 || flags < 0) throw InputError(ctx + ": negative index or m < 1");
        row.subject = static_cast<std::size_t>(subject);
        row.strategy = cell(1);
        if (row.strategy.empty()) throw InputError(ctx + ": empty strategy");
        row.run = static_cast<std::size_t>(run);
        row.m = static_cast<std::size_t>(m);
        row.rmse = csv::parse_double(cell(4), ctx);
        row.cc = csv::parse_double(cell(5), ctx);
        row.flags = static_cast<unsigned>(flags);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path + ": no result rows");
    return rows;
}

// ---------------------------------------------------------------------------
// Learning curves

enum class Metric { rmse, cc };

inline const char* metric_name(Metric m) { return m == Metric::rmse ? "rmse" : "cc"; }

inline double metric_of(const ResultRow& r, Metric m) { return m == Metric::rmse ? r.rmse : r.cc; }

struct CurvePoint {
    std::string strategy;
    std::size_t m = 0;
    Metric metric = Metric::rmse;
    double mean = 0.0;
    double sd = 0.0;
};

/// Strategy names in order of first appearance.
inline std::vector<std::string> strategies_in(const ResultsTable& t) {
    std::vector<std::string> out;
    for (const auto& r : t)
        if (std::find(out.begin(), out.end(), r.strategy) == out.end()) out.push_back(r.strategy);
    return out;
}

namespace detail {
inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}
inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}
}  // namespace detail

/// Two-stage average per (strategy, m): mean over runs within each subject, then
/// mean over subjects. `sd` is the sample sd of the subject means, or of the runs
/// when there is a single subject.
inline std::vector<CurvePoint> learning_curves(const ResultsTable& t, Metric metric) {
    if (t.empty()) throw std::invalid_argument("learning_curves: empty results");
    // strategy -> m -> subject -> run values
    std::map<std::string, std::map<std::size_t, std::map<std::size_t, std::vector<double>>>> acc;
    for (const auto& r : t) acc[r.strategy][r.m][r.subject].push_back(metric_of(r, metric));

    std::vector<CurvePoint> out;
    for (const auto& name : strategies_in(t)) {
        for (const auto& [m, by_subject] : acc[name]) {
            std::vector<double> subject_means;
            for (const auto& [s, values] : by_subject) subject_means.push_back(detail::mean_of(values));
            CurvePoint p{name, m, metric, detail::mean_of(subject_means), 0.0};
            p.sd = by_subject.size() > 1 ? detail::sample_sd(subject_means)
                                         : detail::sample_sd(by_subject.begin()->second);
            out.push_back(std::move(p));
        }
    }
    return out;
}

inline std::vector<CurvePoint> curve_for(const std::vector<CurvePoint>& curves, const std::string& strategy) {
    std::vector<CurvePoint> out;
    for (const auto& p : curves)
        if (p.strategy == strategy) out.push_back(p);
    return out;
}

inline void write_curves(const std::vector<CurvePoint>& curves, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "strategy,m,metric,mean,sd\n";
    for (const auto& p : curves)
        out << p.strategy << ',' << p.m << ',' << metric_name(p.metric) << ',' << csv::format_double(p.mean) << ','
            << csv::format_double(p.sd) << '\n';
    if (!out) throw InputError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Percentage improvement of A over B

struct ImprovementPoint {
    std::string pair;  // "a/b"
    std::size_t m = 0;
    Metric metric = Metric::rmse;
    double value = 0.0;
    bool missing = false;  // division by zero
};

/// RMSE: 100 (B - A) / B. CC: 100 (A - B) / |B|. Positive means A is better.
inline std::vector<ImprovementPoint> pct_improvement(const std::vector<CurvePoint>& a,
                                                     const std::vector<CurvePoint>& b, Metric metric) {
    std::map<std::size_t, double> bm;
    for (const auto& p : b) bm[p.m] = p.mean;
    std::vector<ImprovementPoint> out;
    for (const auto& p : a) {
        const auto it = bm.find(p.m);
        if (it == bm.end()) throw std::invalid_argument("pct_improvement: m grids differ");
        ImprovementPoint ip;
        ip.pair = (a.empty() ? std::string() : a.front().strategy) + "/" + (b.empty() ? std::string() : b.front().strategy);
        ip.m = p.m;
        ip.metric = metric;
        const double base = it->second;
        const double denom = metric == Metric::rmse ? base : std::abs(base);
        if (denom == 0.0) {
            ip.missing = true;
        } else {
            ip.value = metric == Metric::rmse ? 100.0 * (base - p.mean) / denom : 100.0 * (p.mean - base) / denom;
        }
        out.push_back(std::move(ip));
    }
    if (a.size() != bm.size()) throw std::invalid_argument("pct_improvement: m grids differ");
    return out;
}

/// The six comparisons reported for the five main strategies.
inline const std::vector<std::pair<std::string, std::string>> kReportedPairs = {
    {"qbc", "bl"}, {"eqbc", "bl"}, {"emcm", "bl"}, {"eemcm", "bl"}, {"eqbc", "qbc"}, {"eemcm", "emcm"}};

/// Improvement curves for every reported pair (plus each ablation against its
/// plain baseline) whose strategies are present.
inline std::vector<ImprovementPoint> improvement_table(const ResultsTable& t) {
    std::vector<std::pair<std::string, std::string>> pairs = kReportedPairs;
    for (const char* base : {"qbc", "emcm"})
        for (const char* n : {"1", "2", "3"}) pairs.emplace_back(std::string("e") + base + n, base);

    const auto present = strategies_in(t);
    auto has = [&](const std::string& s) { return std::find(present.begin(), present.end(), s) != present.end(); };
    std::vector<ImprovementPoint> out;
    for (Metric metric : {Metric::rmse, Metric::cc}) {
        const auto curves = learning_curves(t, metric);
        for (const auto& [a, b] : pairs) {
            if (!has(a) || !has(b)) continue;
            auto pts = pct_improvement(curve_for(curves, a), curve_for(curves, b), metric);
            out.insert(out.end(), pts.begin(), pts.end());
        }
    }
    return out;
}

inline void write_improvements(const std::vector<ImprovementPoint>& pts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "pair,m,metric,value,flag\n";
    for (const auto& p : pts)
        out << p.pair << ',' << p.m << ',' << metric_name(p.metric) << ','
            << (p.missing ? std::string("nan") : csv::format_double(p.value)) << ',' << (p.missing ? 1 : 0) << '\n';
    if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace albatch
