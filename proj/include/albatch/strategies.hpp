#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "albatch/clustering.hpp"
#include "albatch/committee.hpp"
#include "albatch/dataset.hpp"
#include "albatch/random.hpp"
#include "albatch/regression.hpp"

namespace albatch {

enum class BaseSelector { random, qbc, emcm };

/// The three EBMAL enhancements; each can be switched on independently.
struct EnhancementFlags {
    bool representative_init = false;
    bool outlier_blacklist = false;
    bool diversity = false;

    static constexpr EnhancementFlags all() { return {true, true, true}; }
    friend bool operator==(const EnhancementFlags&, const EnhancementFlags&) = default;
};

struct StrategySpec {
    std::string name;
    BaseSelector base = BaseSelector::random;
    EnhancementFlags flags;
    std::size_t k = 5;
    double gamma = 0.02;
    std::size_t committee_size = kDefaultCommitteeSize;
    double sigma = kDefaultRidge;

    void validate() const {
        if (k < 1) throw std::invalid_argument("strategy " + name + ": k must be >= 1");
        if (!(gamma >= 0.0 && gamma < 0.5)) throw std::invalid_argument("strategy " + name + ": gamma must be in [0,0.5)");
        if (committee_size < 2) throw std::invalid_argument("strategy " + name + ": committee size must be >= 2");
        if (!(sigma >= 0.0)) throw std::invalid_argument("strategy " + name + ": sigma must be >= 0");
        if (base == BaseSelector::random && flags.diversity)
            throw std::invalid_argument("strategy " + name + ": diversity needs an informativeness scorer");
    }
};

/// Names accepted on the command line.
inline constexpr std::string_view kStrategyNames[] = {"bl",    "qbc",   "eqbc",   "emcm",   "eemcm",  "eemcm1",
                                                      "eemcm2", "eemcm3", "eqbc1", "eqbc2", "eqbc3"};

/// bl, qbc, emcm; eqbc/eemcm (all enhancements); eqbcN/eemcmN (only enhancement N:
/// 1 = representative init, 2 = outlier blacklist, 3 = diversity).
inline StrategySpec strategy_from_name(std::string_view name) {
    StrategySpec s;
    s.name = std::string(name);
    if (name == "bl") return s;

    std::string_view rest = name;
    if (rest.rfind("eqbc", 0) == 0 || rest.rfind("eemcm", 0) == 0) {
        const bool qbc = rest[1] == 'q';
        s.base = qbc ? BaseSelector::qbc : BaseSelector::emcm;
        rest.remove_prefix(qbc ? 4 : 5);
        if (rest.empty()) {
            s.flags = EnhancementFlags::all();
            return s;
        }
        if (rest == "1") s.flags.representative_init = true;
        else if (rest == "2") s.flags.outlier_blacklist = true;
        else if (rest == "3") s.flags.diversity = true;
        else throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
        return s;
    }
    if (name == "qbc") {
        s.base = BaseSelector::qbc;
        return s;
    }
    if (name == "emcm") {
        s.base = BaseSelector::emcm;
        return s;
    }
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

struct CandidateScore {
    std::size_t index;  // pool row
    double score;
    std::size_t cluster;  // cluster in the selection's clustering, if any
};

struct BatchSelection {
    std::vector<std::size_t> chosen;  // pool rows, in selection order
    std::vector<std::size_t> newly_blacklisted;
    std::vector<CandidateScore> diagnostics;
    // The clustering the picks were drawn from; rows map to `clustered_points`.
    std::optional<Clustering> clustering;
    std::vector<std::size_t> clustered_points;
    bool blacklist_guard_hit = false;
};

namespace detail {

/// Descending score, ties by lowest sample id.
inline void sort_by_score(std::vector<CandidateScore>& c, std::span<const SampleId> ids) {
    std::sort(c.begin(), c.end(), [&](const CandidateScore& a, const CandidateScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return ids[a.index] < ids[b.index];
    });
}

}  // namespace detail

/// Uniform draw without replacement of min(k, |unlabeled|) samples.
inline BatchSelection select_random(const LabelState& state, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> cand(state.unlabeled().begin(), state.unlabeled().end());
    if (cand.empty()) throw std::invalid_argument("select_random: no unlabeled samples");
    const std::size_t m = std::min(k, cand.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cand.size() - 1);
        std::swap(cand[i], cand[pick(rng)]);
    }
    cand.resize(m);
    BatchSelection sel;
    sel.chosen = std::move(cand);
    return sel;
}

/// Representative initialization with outlier screening.
///
/// Clusters the pool into k groups; any cluster with at most max(1, gamma*N)
/// members (N = full pool size) is flagged and removed, and clustering is
/// repeated until every cluster passes. The member nearest each surviving
/// centroid is chosen. Removal is skipped, and `blacklist_guard_hit` set, when
/// it would leave fewer than k samples.
inline BatchSelection ebmal_init(const Matrix& x, std::size_t k, double gamma, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (k < 1 || n < k) throw std::invalid_argument("ebmal_init: need 1 <= k <= pool size");
    const double threshold = std::max(1.0, gamma * static_cast<double>(n));

    BatchSelection sel;
    std::vector<std::size_t> survivors(n);
    std::iota(survivors.begin(), survivors.end(), 0);

    Clustering cl;
    for (std::uint64_t round = 0;; ++round) {
        cl = kmeans(x.select_rows(survivors), k, derive_seed(seed, round));
        std::vector<char> drop(cl.k(), 0);
        std::size_t dropped = 0;
        for (std::size_t c = 0; c < cl.k(); ++c) {
            if (static_cast<double>(cl.sizes[c]) <= threshold) {
                drop[c] = 1;
                dropped += cl.sizes[c];
            }
        }
        if (dropped == 0) break;
        if (survivors.size() - dropped < k) {
            sel.blacklist_guard_hit = true;
            break;
        }
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < survivors.size(); ++i) {
            (drop[cl.assignments[i]] ? sel.newly_blacklisted : keep).push_back(survivors[i]);
        }
        survivors = std::move(keep);
    }
    std::sort(sel.newly_blacklisted.begin(), sel.newly_blacklisted.end());

    const Matrix xs = x.select_rows(survivors);
    for (std::size_t c = 0; c < cl.k(); ++c) {
        const std::size_t local = closest_to_centroid(xs, cl, c);
        sel.chosen.push_back(survivors[local]);
        sel.diagnostics.push_back({survivors[local], std::sqrt(squared_distance(xs.row(local), cl.centroids.row(c))), c});
    }
    sel.clustering = std::move(cl);
    sel.clustered_points = std::move(survivors);
    return sel;
}

/// Informativeness of each candidate under a bootstrap committee fit on the
/// labeled samples. The committee uses the "bootstrap" child stream of `seed`.
inline std::vector<double> score_candidates(BaseSelector base, const Dataset& pool, const LabelState& state,
                                            std::span<const std::size_t> candidates, std::size_t committee_size,
                                            double sigma, std::uint64_t seed) {
    if (base == BaseSelector::random) throw std::invalid_argument("score_candidates: random has no scores");
    const auto& lab = state.labeled();
    const Matrix xl = pool.features.select_rows(lab);
    std::vector<double> yl;
    yl.reserve(lab.size());
    for (auto i : lab) yl.push_back(pool.targets[i]);

    const auto models = bootstrap_committee(xl, yl, committee_size, sigma, stream_seed(seed, "bootstrap"));
    const Matrix xc = pool.features.select_rows(candidates);
    const auto cp = committee_predict(models, xc);
    return base == BaseSelector::qbc ? qbc_scores(cp) : emcm_scores(cp, xc);
}

/// Plain top-k by score among `candidates`, ties by lowest id.
inline BatchSelection select_top_k(std::span<const double> scores, std::span<const std::size_t> candidates,
                                   std::span<const SampleId> ids, std::size_t k) {
    if (scores.size() != candidates.size()) throw std::invalid_argument("select_top_k: scores/candidates mismatch");
    BatchSelection sel;
    for (std::size_t i = 0; i < candidates.size(); ++i) sel.diagnostics.push_back({candidates[i], scores[i], 0});
    detail::sort_by_score(sel.diagnostics, ids);
    for (std::size_t i = 0; i < std::min(k, sel.diagnostics.size()); ++i) sel.chosen.push_back(sel.diagnostics[i].index);
    return sel;
}

/// Diversity-aware selection from already-scored candidates: keep the top 2k,
/// cluster them into k groups, take the best-scored member of each group.
/// Fewer than k candidates are all taken without clustering.
inline BatchSelection diverse_top_k(std::span<const double> scores, std::span<const std::size_t> candidates,
                                    const Dataset& pool, std::size_t k, std::uint64_t cluster_seed) {
    if (scores.size() != candidates.size()) throw std::invalid_argument("diverse_top_k: scores/candidates mismatch");
    if (candidates.empty()) throw std::invalid_argument("diverse_top_k: no candidates");

    std::vector<CandidateScore> ranked;
    for (std::size_t i = 0; i < candidates.size(); ++i) ranked.push_back({candidates[i], scores[i], 0});
    detail::sort_by_score(ranked, pool.ids);

    BatchSelection sel;
    if (ranked.size() <= k) {
        for (const auto& c : ranked) sel.chosen.push_back(c.index);
        sel.diagnostics = std::move(ranked);
        return sel;
    }
    ranked.resize(std::min(2 * k, ranked.size()));
    for (const auto& c : ranked) sel.clustered_points.push_back(c.index);

    auto cl = kmeans(pool.features.select_rows(sel.clustered_points), k, cluster_seed);
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].cluster = cl.assignments[i];
    // ranked is already score-descending with id tie-break, so the first hit per cluster wins
    std::vector<char> taken(k, 0);
    for (const auto& c : ranked) {
        if (taken[c.cluster]) continue;
        taken[c.cluster] = 1;
        sel.chosen.push_back(c.index);
    }
    sel.diagnostics = std::move(ranked);
    sel.clustering = std::move(cl);
    return sel;
}

/// Scores unlabeled candidates with the base selector and applies diverse_top_k.
inline BatchSelection ebmal_select(BaseSelector base, const Dataset& pool, const LabelState& state, std::size_t k,
                                   std::size_t committee_size, double sigma, std::uint64_t seed) {
    const std::vector<std::size_t> cand(state.unlabeled().begin(), state.unlabeled().end());
    if (cand.empty()) throw std::invalid_argument("ebmal_select: no candidates");
    if (state.labeled().empty()) throw std::invalid_argument("ebmal_select: needs a labeled batch");
    const auto scores = score_candidates(base, pool, state, cand, committee_size, sigma, seed);
    return diverse_top_k(scores, cand, pool, k, stream_seed(seed, "diversity"));
}

// ---------------------------------------------------------------------------

struct StrategyRun {
    LabelState state;
    std::vector<RidgeModel> models;  // models[m] is fit on batches 0..m
    std::vector<BatchSelection> batches;
    std::vector<std::size_t> flagged_outliers;  // found at init, enforced only with outlier_blacklist
};

/// Runs up to M batches of one strategy on a pool, refitting ridge after each.
///
/// Randomness comes from labeled child streams of `seed` ("init", "random"/m,
/// "batch"/m), so strategies whose code paths coincide draw identical values:
/// the random first batch of qbc/emcm equals bl's, and eqbc/eemcm share init.
/// Stops early if no unlabeled candidates remain. With k == 1 the second batch
/// is random, since a committee cannot be bootstrapped from one sample.
inline StrategyRun run_strategy(const Dataset& pool, const StrategySpec& spec, std::size_t batches,
                                std::uint64_t seed) {
    spec.validate();
    if (batches < 1) throw std::invalid_argument("run_strategy: need at least one batch");
    const std::size_t n = pool.size();

    StrategyRun run{LabelState(n), {}, {}, {}};
    auto fit = [&] {
        const auto& lab = run.state.labeled();
        std::vector<double> y;
        for (auto i : lab) y.push_back(pool.targets[i]);
        run.models.push_back(ridge_fit(pool.features.select_rows(lab), y, spec.sigma));
    };

    // Batch 1
    BatchSelection first;
    if (spec.flags.representative_init || spec.flags.outlier_blacklist) {
        BatchSelection init = ebmal_init(pool.features, std::min(spec.k, n), spec.gamma, stream_seed(seed, "init"));
        run.flagged_outliers = init.newly_blacklisted;
        if (spec.flags.outlier_blacklist) run.state.blacklist(run.flagged_outliers);
        if (spec.flags.representative_init) first = std::move(init);
    }
    if (!spec.flags.representative_init) first = select_random(run.state, spec.k, stream_seed(seed, "random", 1));
    run.state.label_batch(first.chosen);
    run.batches.push_back(std::move(first));
    fit();

    for (std::size_t m = 2; m <= batches; ++m) {
        if (run.state.unlabeled().empty()) break;
        BatchSelection sel;
        const std::uint64_t batch_seed = stream_seed(seed, "batch", m);
        if (spec.base == BaseSelector::random || run.state.labeled().size() < 2) {
            // a committee needs two labeled samples to bootstrap from
            sel = select_random(run.state, spec.k, stream_seed(seed, "random", m));
        } else if (spec.flags.diversity) {
            sel = ebmal_select(spec.base, pool, run.state, spec.k, spec.committee_size, spec.sigma, batch_seed);
        } else {
            const std::vector<std::size_t> cand(run.state.unlabeled().begin(), run.state.unlabeled().end());
            const auto scores =
                score_candidates(spec.base, pool, run.state, cand, spec.committee_size, spec.sigma, batch_seed);
            sel = select_top_k(scores, cand, pool.ids, spec.k);
        }
        run.state.label_batch(sel.chosen);
        run.batches.push_back(std::move(sel));
        fit();
    }
    return run;
}

}  // namespace albatch
