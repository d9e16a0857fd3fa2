#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "albatch/csv.hpp"
#include "albatch/error.hpp"
#include "albatch/harness.hpp"

namespace albatch {

enum class Direction { lower_better, higher_better };

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct RankSummary {
    std::vector<double> ranks;  // mid-ranks, 1-based, aligned with the input
    double tie_term = 0.0;      // sum over tie groups of t^3 - t
};

inline RankSummary midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    RankSummary out{std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) out.ranks[order[t]] = mid;
        const auto t = static_cast<double>(j - i);
        out.tie_term += t * t * t - t;
        i = j;
    }
    return out;
}

struct DunnResult {
    double z = 0.0;
    double p = 0.5;  // one-sided, small when the first group of the pair is better
};

/// Dunn's multiple comparisons on ranks pooled over all groups.
///
/// For a pair (i, j): z = (Rbar_i - Rbar_j) / sqrt((N(N+1)/12 - T/(12(N-1))) (1/n_i + 1/n_j)),
/// T = sum(t^3 - t) over tie groups. With lower_better, p = Phi(z); with
/// higher_better, p = Phi(-z). Data that are all tied give p = 0.5.
inline std::vector<DunnResult> dunn_pairwise(const std::vector<std::vector<double>>& groups,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                             Direction direction) {
    if (groups.size() < 2) throw std::invalid_argument("dunn_pairwise: need at least 2 groups");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.size() < 2) throw std::invalid_argument("dunn_pairwise: every group needs >= 2 observations");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const auto rs = midranks(pooled);
    const auto n_total = static_cast<double>(pooled.size());

    std::vector<double> mean_rank(groups.size(), 0.0);
    std::size_t offset = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i = 0; i < groups[g].size(); ++i) mean_rank[g] += rs.ranks[offset + i];
        mean_rank[g] /= static_cast<double>(groups[g].size());
        offset += groups[g].size();
    }
    const double var_unit = n_total * (n_total + 1.0) / 12.0 - rs.tie_term / (12.0 * (n_total - 1.0));

    std::vector<DunnResult> out;
    for (const auto& [i, j] : pairs) {
        if (i >= groups.size() || j >= groups.size()) throw std::invalid_argument("dunn_pairwise: pair out of range");
        const double se = std::sqrt(var_unit * (1.0 / static_cast<double>(groups[i].size()) +
                                                1.0 / static_cast<double>(groups[j].size())));
        DunnResult r;
        if (se > 0.0 && std::isfinite(se)) {
            r.z = (mean_rank[i] - mean_rank[j]) / se;
            r.p = direction == Direction::lower_better ? normal_cdf(r.z) : normal_cdf(-r.z);
        }
        out.push_back(r);
    }
    return out;
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
inline std::vector<double> bh_fdr(std::span<const double> p) {
    const std::size_t n = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh_fdr: p-values must lie in [0,1]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adj(n);
    double running = 1.0;
    for (std::size_t r = n; r-- > 0;) {
        const double v = p[order[r]] * static_cast<double>(n) / static_cast<double>(r + 1);
        running = std::min(running, v);
        adj[order[r]] = std::min(1.0, running);
    }
    return adj;
}

// ---------------------------------------------------------------------------

struct ComparisonCell {
    std::size_t m = 0;
    std::string pair;  // "a_vs_b"
    Metric metric = Metric::rmse;
    double p_raw = 0.5;
    double p_adj = 0.5;
    bool significant = false;
};

using ComparisonTable = std::vector<ComparisonCell>;

inline const std::vector<std::string> kMainStrategies = {"bl", "qbc", "eqbc", "emcm", "eemcm"};

enum class CorrectionFamily { per_m, whole_table };

struct ComparisonOptions {
    double alpha = 0.05;
    CorrectionFamily family = CorrectionFamily::per_m;
    bool two_sided = false;
};

/// Per-m Dunn tests over the five main strategies (ranks pooled across all five).
/// By default one-sided in favour of the first-listed strategy of each reported
/// pair, with BH correction across the six pairs of each m; `whole_table`
/// corrects across every cell at once, `two_sided` uses 2 min(p, 1-p).
inline ComparisonTable comparison_table(const ResultsTable& t, Metric metric, const ComparisonOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("comparison_table: alpha must be in (0,1)");
    const auto present = strategies_in(t);
    for (const auto& s : kMainStrategies)
        if (std::find(present.begin(), present.end(), s) == present.end())
            throw InputError("comparison_table: strategy '" + s + "' missing from results");

    auto index_of = [](const std::string& s) {
        return static_cast<std::size_t>(std::find(kMainStrategies.begin(), kMainStrategies.end(), s) -
                                        kMainStrategies.begin());
    };
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [a, b] : kReportedPairs) pairs.emplace_back(index_of(a), index_of(b));

    // m -> strategy index -> (subject, run) -> value
    std::map<std::size_t, std::vector<std::map<std::pair<std::size_t, std::size_t>, double>>> by_m;
    for (const auto& r : t) {
        const auto s = index_of(r.strategy);
        if (s == kMainStrategies.size()) continue;
        auto& slot = by_m[r.m];
        if (slot.empty()) slot.resize(kMainStrategies.size());
        slot[s][{r.subject, r.run}] = metric_of(r, metric);
    }

    const Direction dir = metric == Metric::rmse ? Direction::lower_better : Direction::higher_better;
    ComparisonTable out;
    for (const auto& [m, per_strategy] : by_m) {
        std::vector<std::vector<double>> groups;
        for (std::size_t s = 0; s < per_strategy.size(); ++s) {
            std::vector<double> g;
            for (const auto& [key, v] : per_strategy[s]) g.push_back(v);
            if (g.empty()) throw InputError("comparison_table: strategy '" + kMainStrategies[s] + "' has no rows at m=" + std::to_string(m));
            groups.push_back(std::move(g));
        }
        const auto dunn = dunn_pairwise(groups, pairs, dir);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double p = opts.two_sided ? std::min(1.0, 2.0 * std::min(dunn[i].p, 1.0 - dunn[i].p)) : dunn[i].p;
            out.push_back({m, kReportedPairs[i].first + "_vs_" + kReportedPairs[i].second, metric, p, p, false});
        }
    }

    auto adjust = [&](std::size_t first, std::size_t last) {
        std::vector<double> raw;
        for (std::size_t i = first; i < last; ++i) raw.push_back(out[i].p_raw);
        const auto adj = bh_fdr(raw);
        for (std::size_t i = first; i < last; ++i) out[i].p_adj = adj[i - first];
    };
    if (opts.family == CorrectionFamily::whole_table) {
        adjust(0, out.size());
    } else {
        for (std::size_t i = 0; i < out.size(); i += pairs.size()) adjust(i, i + pairs.size());
    }
    for (auto& c : out) c.significant = c.p_adj < opts.alpha;
    return out;
}

inline ComparisonTable comparison_table(const ResultsTable& t, Metric metric, double alpha = 0.05) {
    return comparison_table(t, metric, ComparisonOptions{alpha});
}

inline const ComparisonCell& find_cell(const ComparisonTable& t, std::size_t m, const std::string& pair) {
    for (const auto& c : t)
        if (c.m == m && c.pair == pair) return c;
    throw std::out_of_range("comparison cell not found: m=" + std::to_string(m) + " " + pair);
}

inline void write_comparison(const ComparisonTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "m,pair,metric,p_raw,p_adj,significant\n";
    for (const auto& c : t)
        out << c.m << ',' << c.pair << ',' << metric_name(c.metric) << ',' << csv::format_double(c.p_raw) << ','
            << csv::format_double(c.p_adj) << ',' << (c.significant ? 1 : 0) << '\n';
    if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace albatch
