// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "albatch/albatch.hpp"
#include "oracles.hpp"

using namespace albatch;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1 ------------------------------------------------------------------------

Verdict formula_oracles() {
    const auto t0 = Clock::now();
    Rng rng(101);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t p = 2 + rng() % 7, n = 1 + rng() % 200, d = 1 + rng() % 30;
        const std::size_t nl = 2 + rng() % 20;
        Matrix xl(nl, d), xc(n, d);
        std::vector<double> yl(nl);
        for (auto& v : xl.data()) v = g(rng);
        for (auto& v : xc.data()) v = g(rng);
        for (auto& v : yl) v = g(rng);
        const auto models = bootstrap_committee(xl, yl, p, 0.01, rng());
        const auto cp = committee_predict(models, xc);
        const auto q = qbc_scores(cp);
        const auto e = emcm_scores(cp, xc);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> preds;
            for (const auto& m : models) {
                double s = m.bias;
                for (std::size_t j = 0; j < d; ++j) s += m.weights[j] * xc(i, j);
                preds.push_back(s);
            }
            const std::vector<double> xi(xc.row(i).begin(), xc.row(i).end());
            worst = std::max(worst, std::abs(q[i] - oracle::qbc(preds)));
            worst = std::max(worst, std::abs(e[i] - oracle::emcm(preds, xi)));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 10.0, fmt("1000 instances, max |diff| %.2e, %.2f s", worst, secs)};
}

// 2 ------------------------------------------------------------------------

Verdict ridge_oracle() {
    Rng rng(202);
    std::normal_distribution<double> g;
    double worst = 0.0;
    int deficient = 0;
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 2 + rng() % 40, d = 1 + rng() % 15;
        const int kind = t % 4;  // 0,1 full rank; 2 duplicated column; 3 fewer rows than columns
        if (kind == 3) n = 1 + rng() % std::max<std::size_t>(1, d);
        if (kind == 2 && d < 2) d = 2;
        Matrix x(n, d);
        for (auto& v : x.data()) v = g(rng);
        if (kind == 2)
            for (std::size_t i = 0; i < n; ++i) x(i, d - 1) = 2.0 * x(i, 0);
        if (kind >= 2) ++deficient;
        std::vector<double> y(n);
        for (auto& v : y) v = g(rng);
        const double sigma = (t % 3 == 0) ? 0.01 : (t % 3 == 1 ? 0.1 : 1.0);
        const auto m = ridge_fit(x, y, sigma);
        oracle::Rows rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i].assign(x.row(i).begin(), x.row(i).end());
        const auto ref = oracle::ridge_pinv(rows, y, sigma);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < d; ++j) num += std::pow(m.weights[j] - ref[j], 2), den += ref[j] * ref[j];
        num += std::pow(m.bias - ref[d], 2);
        den += ref[d] * ref[d];
        worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
    }
    return {worst <= 1e-8, fmt("200 problems (%d rank-deficient), max relative error %.2e", deficient, worst)};
}

// 3 ------------------------------------------------------------------------

Verdict drowsiness_checks() {
    const double a = drowsiness_index(1.0, 1.0), b = drowsiness_index(0.5, 1.0), c = drowsiness_index(2.0, 1.0);
    bool monotone = true;
    double prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
        const double v = drowsiness_index(10.0 * i / 999.0, 1.0);
        monotone = monotone && v >= prev;
        prev = v;
    }
    const bool ok = a == 0.0 && b == 0.0 && std::abs(c - 0.462117) <= 1e-6 && monotone;
    return {ok, fmt("y(1)=%g y(0.5)=%g y(2)=%.7f monotone=%s", a, b, c, monotone ? "yes" : "no")};
}

// 4 ------------------------------------------------------------------------

Verdict algorithm_invariants() {
    int bad_init = 0, bad_blacklist = 0, bad_diversity = 0, diversity_batches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Rng rng(static_cast<std::uint64_t>(4000 + trial));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> g;
        const std::size_t d = 2 + rng() % 4;
        Dataset pool;
        pool.features = Matrix(100, d);
        for (std::size_t i = 0; i < 98; ++i)
            for (std::size_t j = 0; j < d; ++j) pool.features(i, j) = u(rng);
        std::vector<double> dir(d);
        for (auto& v : dir) v = g(rng);
        const double nd = norm2(dir);
        for (std::size_t j = 0; j < d; ++j) {
            pool.features(98, j) = 0.5 + 20.0 * dir[j] / nd;
            pool.features(99, j) = pool.features(98, j) + (j == 0 ? 0.01 : 0.0);
        }
        for (std::size_t i = 0; i < 100; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += pool.features(i, j) * static_cast<double>(j + 1);
            pool.targets.push_back(s + 0.1 * g(rng));
            pool.ids.push_back(static_cast<SampleId>(i));
        }

        const auto spec = strategy_from_name(trial % 2 ? "eqbc" : "eemcm");
        const auto run = run_strategy(pool, spec, 12, static_cast<std::uint64_t>(trial));

        // init: distinct clusters, closest-to-centroid members
        const auto& init = run.batches.front();
        std::set<std::size_t> clusters;
        bool init_ok = init.clustering.has_value() && init.chosen.size() == spec.k;
        if (init_ok) {
            const auto& cl = *init.clustering;
            oracle::Rows rows;
            for (auto i : init.clustered_points) rows.emplace_back(pool.features.row(i).begin(), pool.features.row(i).end());
            for (std::size_t c = 0; c < cl.k(); ++c) {
                const std::vector<double> centre(cl.centroids.row(c).begin(), cl.centroids.row(c).end());
                const auto local = oracle::brute_closest(rows, cl.members(c), centre);
                init_ok = init_ok && init.chosen[c] == init.clustered_points[local];
                clusters.insert(cl.assignments[local]);
            }
            init_ok = init_ok && clusters.size() == spec.k;
        }
        bad_init += !init_ok;

        bool bl_ok = run.state.blacklisted() == std::set<std::size_t>{98, 99};
        for (auto i : run.state.labeled()) bl_ok = bl_ok && i < 98;
        bad_blacklist += !bl_ok;

        for (std::size_t b = 1; b < run.batches.size(); ++b) {
            const auto& sel = run.batches[b];
            if (!sel.clustering) continue;
            ++diversity_batches;
            std::map<std::size_t, double> best;
            for (const auto& c : sel.diagnostics)
                best[c.cluster] = std::max(best.count(c.cluster) ? best[c.cluster] : -INFINITY, c.score);
            std::set<std::size_t> seen;
            bool ok = sel.chosen.size() == spec.k;
            for (auto i : sel.chosen) {
                const auto it = std::find_if(sel.diagnostics.begin(), sel.diagnostics.end(),
                                             [&](const CandidateScore& c) { return c.index == i; });
                ok = ok && it != sel.diagnostics.end() && seen.insert(it->cluster).second && it->score == best[it->cluster];
            }
            bad_diversity += !ok;
        }
    }
    const bool ok = bad_init == 0 && bad_blacklist == 0 && bad_diversity == 0 && diversity_batches > 0;
    return {ok, fmt("1000 trials: init violations %d, blacklist violations %d, diversity violations %d/%d batches",
                    bad_init, bad_blacklist, bad_diversity, diversity_batches)};
}

// 5, 6, 9 ------------------------------------------------------------------

struct DefaultSuite {
    ResultsTable results;
    std::string bytes_first, bytes_second;
    double seconds = 0.0;
    std::size_t jobs = 1;
};

std::string results_bytes(const ResultsTable& t, const std::string& name) {
    const auto path = std::filesystem::temp_directory_path() / name;
    write_results(t, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DefaultSuite run_default_suite() {
    const SynthSuiteConfig sc;  // 15 subjects, 360 x 10, 2% outliers
    std::vector<Dataset> subjects;
    for (std::size_t i = 0; i < sc.subjects; ++i) subjects.push_back(synth_subject(sc, i).data);

    ExperimentConfig cfg;  // 8 strategies, 30 runs, M=12, k=5, master_seed=0
    DefaultSuite out;
    out.jobs = std::max(1u, std::thread::hardware_concurrency());
    cfg.jobs = out.jobs;
    const auto t0 = Clock::now();
    out.results = run_experiment(cfg, subjects);
    out.seconds = seconds_since(t0);
    out.bytes_first = results_bytes(out.results, "albatch_acceptance_a.csv");
    cfg.jobs = 1;
    out.bytes_second = results_bytes(run_experiment(cfg, subjects), "albatch_acceptance_b.csv");
    return out;
}

Verdict direction_of_effect(const DefaultSuite& s) {
    const auto curves = learning_curves(s.results, Metric::rmse);
    auto mean = [&](const std::string& name, std::size_t m) {
        for (const auto& p : curves)
            if (p.strategy == name && p.m == m) return p.mean;
        return std::nan("");
    };
    const auto tab = comparison_table(s.results, Metric::rmse);
    const double p1 = find_cell(tab, 1, "eemcm_vs_bl").p_adj;
    const bool a = p1 < 0.05;
    const bool b = mean("eemcm", 1) < mean("emcm", 1) && mean("eemcm", 2) < mean("emcm", 2) &&
                   mean("eemcm", 3) < mean("emcm", 3);
    bool c = true;
    for (const auto& name : kDefaultStrategies) c = c && mean(name, 12) < mean(name, 1);
    const bool d1 = mean("eemcm1", 1) < mean("emcm", 1);
    const bool d12 = mean("eemcm", 12) < mean("eemcm1", 12) && mean("eemcm", 12) < mean("eemcm2", 12) &&
                     mean("eemcm", 12) < mean("eemcm3", 12);
    std::string detail = fmt("(a) p_adj=%.2g %s; (b) eemcm/emcm m1 %.4f/%.4f m2 %.4f/%.4f m3 %.4f/%.4f %s; (c) %s; ", p1,
                             a ? "ok" : "FAIL", mean("eemcm", 1), mean("emcm", 1), mean("eemcm", 2), mean("emcm", 2),
                             mean("eemcm", 3), mean("emcm", 3), b ? "ok" : "FAIL", c ? "ok" : "FAIL");
    detail += fmt("(d) eemcm1 %.4f vs emcm %.4f at m1 %s, m12 eemcm %.4f vs eemcm1 %.4f eemcm2 %.4f eemcm3 %.4f %s",
                  mean("eemcm1", 1), mean("emcm", 1), d1 ? "ok" : "FAIL", mean("eemcm", 12), mean("eemcm1", 12),
                  mean("eemcm2", 12), mean("eemcm3", 12), d12 ? "ok" : "FAIL");
    return {a && b && c && d1 && d12, detail};
}

Verdict paired_null(const DefaultSuite& s) {
    const auto tab = comparison_table(s.results, Metric::rmse);
    const double p = find_cell(tab, 1, "qbc_vs_bl").p_adj;
    return {p >= 0.3 && p <= 0.7, fmt("qbc vs bl adjusted p at m=1: %.4f", p)};
}

Verdict determinism_runtime(const DefaultSuite& s) {
    const bool same = s.bytes_first == s.bytes_second;
    return {same && s.seconds < 600.0,
            fmt("%zu rows in %.1f s with %zu jobs; rerun with 1 job byte-identical: %s", s.results.size(), s.seconds,
                s.jobs, same ? "yes" : "no")};
}

// 7 ------------------------------------------------------------------------

Verdict statistics_oracles() {
    // Dunn vs permutation
    Rng rng(707);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int f = 0; f < 20; ++f) {
        const std::size_t groups_n = 3 + f % 3;
        std::vector<std::vector<double>> groups(groups_n);
        for (std::size_t i = 0; i < groups_n; ++i) {
            const std::size_t n = 6 + rng() % 7;
            for (std::size_t k = 0; k < n; ++k) {
                double v = g(rng) + 0.35 * static_cast<double>(i) * (f % 2 ? 1.0 : -1.0);
                if (f % 4 == 0) v = std::round(v * 2.0) / 2.0;  // ties
                groups[i].push_back(v);
            }
        }
        const auto dunn = dunn_pairwise(groups, {{0, 1}, {0, groups_n - 1}}, Direction::lower_better);
        worst = std::max(worst, std::abs(dunn[0].p - oracle::dunn_permutation(groups, 0, 1, 10000, rng())));
        worst = std::max(worst, std::abs(dunn[1].p - oracle::dunn_permutation(groups, 0, static_cast<int>(groups_n - 1), 10000, rng())));
    }

    // BH on hand-computed triples
    struct Triple {
        std::vector<double> p, adj;
    };
    const std::vector<Triple> triples{{{0.01, 0.02, 0.03}, {0.03, 0.03, 0.03}},
                                      {{0.04, 0.01, 0.5}, {0.06, 0.03, 0.5}},
                                      {{0.9, 0.8, 0.001}, {0.9, 0.9, 0.003}},
                                      {{0.02, 0.02, 0.9}, {0.03, 0.03, 0.9}}};
    bool bh_ok = true;
    for (const auto& t : triples) {
        const auto adj = bh_fdr(t.p);
        for (std::size_t i = 0; i < 3; ++i) bh_ok = bh_ok && std::abs(adj[i] - t.adj[i]) <= 1e-15;
    }

    // null false-positive rate: any of six adjusted p < 0.05 with identical distributions
    int hits = 0;
    for (int sim = 0; sim < 1000; ++sim) {
        ResultsTable t;
        for (const auto& name : kMainStrategies)
            for (std::size_t r = 0; r < 30; ++r) {
                ResultRow row;
                row.strategy = name;
                row.run = r;
                row.m = 1;
                row.rmse = g(rng);
                row.cc = g(rng);
                t.push_back(row);
            }
        const auto tab = comparison_table(t, Metric::rmse);
        hits += std::any_of(tab.begin(), tab.end(), [](const ComparisonCell& c) { return c.significant; });
    }
    const double fpr = hits / 1000.0;
    return {worst <= 0.02 && bh_ok && fpr <= 0.07,
            fmt("Dunn vs permutation max |diff| %.4f over 20 fixtures; BH triples %s; null FPR %.3f", worst,
                bh_ok ? "exact" : "WRONG", fpr)};
}

// 8 ------------------------------------------------------------------------

Verdict kmeans_invariants() {
    Rng rng(808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 0.1);
    int increases = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 3 + rng() % 150, d = 1 + rng() % 8;
        const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 10);
        Matrix x(n, d);
        for (auto& v : x.data()) v = u(rng);
        if (t % 5 == 0)
            for (std::size_t i = 1; i < n; i += 3) std::copy(x.row(i - 1).begin(), x.row(i - 1).end(), x.row(i).begin());
        const auto cl = kmeans(x, k, rng());
        for (std::size_t i = 1; i < cl.inertia_history.size(); ++i)
            increases += cl.inertia_history[i] > cl.inertia_history[i - 1] * (1 + 1e-12) + 1e-15;
    }
    int misrecovered = 0;
    for (int t = 0; t < 100; ++t) {
        Matrix x(60, 3);
        for (std::size_t i = 0; i < 60; ++i)
            for (std::size_t j = 0; j < 3; ++j) x(i, j) = (i < 30 ? 0.0 : 5.0) + g(rng);
        const auto cl = kmeans(x, 2, rng());
        for (std::size_t i = 0; i < 60; ++i)
            if ((cl.assignments[i] == cl.assignments[0]) != (i < 30)) {
                ++misrecovered;
                break;
            }
    }
    return {increases == 0 && misrecovered == 0,
            fmt("500 instances, inertia increases %d; two-blob recovery failures %d/100", increases, misrecovered)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s  %d. %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    };

    report(1, "score formula oracles", formula_oracles);
    report(2, "ridge pseudo-inverse oracle", ridge_oracle);
    report(3, "drowsiness mapping", drowsiness_checks);
    report(4, "selection structural invariants", algorithm_invariants);

    DefaultSuite suite;
    std::string suite_error;
    try {
        suite = run_default_suite();
    } catch (const std::exception& e) {
        suite_error = e.what();
    }
    auto with_suite = [&](Verdict (*fn)(const DefaultSuite&)) {
        return [&, fn] { return suite_error.empty() ? fn(suite) : Verdict{false, "default suite failed: " + suite_error}; };
    };
    report(5, "direction of effect on the default synthetic suite", with_suite(direction_of_effect));
    report(6, "paired-null calibration", with_suite(paired_null));
    report(7, "statistics oracles", statistics_oracles);
    report(8, "k-means invariants", kmeans_invariants);
    report(9, "end-to-end determinism and runtime", with_suite(determinism_runtime));

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
