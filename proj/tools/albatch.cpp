// albatch: synthetic data, active-learning benchmark runs, statistics and curves.
//
// Exit codes: 0 ok, 1 internal error, 2 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "albatch/albatch.hpp"

namespace fs = std::filesystem;
using namespace albatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

ConfigFile load_config(const std::string& path) {
    if (path.empty()) return {};
    return ConfigFile::load(path);
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = synth_config_from(load_config(config_path));
    const auto out = prepare_out_dir(out_dir);

    std::ofstream meta(out / "meta.csv");
    if (!meta) throw InputError("cannot write meta.csv in '" + out_dir + "'");
    meta << "subject,bias";
    for (std::size_t j = 0; j < cfg.subject.n_features; ++j) meta << ",w" << j;
    meta << ",outlier_ids\n";

    for (std::size_t i = 0; i < cfg.subjects; ++i) {
        const auto subject = synth_subject(cfg, i);
        save_csv(subject.data, (out / ("subject_" + std::to_string(i + 1) + ".csv")).string());
        meta << i + 1 << ',' << csv::format_double(subject.bias);
        for (double w : subject.weights) meta << ',' << csv::format_double(w);
        meta << ',';
        for (std::size_t k = 0; k < subject.outlier_ids.size(); ++k) meta << (k ? ";" : "") << subject.outlier_ids[k];
        meta << '\n';
    }
    if (!meta) throw InputError("write failed for meta.csv");
    std::cout << "wrote " << cfg.subjects << " subjects to " << out_dir << "\n";
    return kExitOk;
}

/// subject_<i>.csv files sorted by i.
std::vector<Dataset> load_subjects(const std::string& dir) {
    if (!fs::is_directory(dir)) throw InputError("data directory '" + dir + "' does not exist");
    std::vector<std::pair<long long, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("subject_", 0) != 0 || entry.path().extension() != ".csv") continue;
        const auto stem = entry.path().stem().string().substr(8);
        files.emplace_back(csv::parse_int(stem, name), entry.path());
    }
    if (files.empty()) throw InputError("no subject_<i>.csv files in '" + dir + "'");
    std::sort(files.begin(), files.end());
    std::vector<Dataset> out;
    for (const auto& [i, path] : files) {
        out.push_back(load_csv(path.string()));
        try {
            out.back().validate();
        } catch (const std::invalid_argument& e) {
            throw InputError(path.string() + ": " + e.what());
        }
    }
    return out;
}

void write_curves_and_improvements(const ResultsTable& results, const fs::path& out) {
    auto curves = learning_curves(results, Metric::rmse);
    const auto cc = learning_curves(results, Metric::cc);
    curves.insert(curves.end(), cc.begin(), cc.end());
    write_curves(curves, (out / "curves.csv").string());
    write_improvements(improvement_table(results), (out / "improvement.csv").string());
}

int cmd_run(const std::string& config_path, const std::string& data_dir, const std::string& out_dir,
            const std::string& strategies, std::size_t jobs) {
    auto file = load_config(config_path);
    if (!strategies.empty()) file.set("strategies", strategies);
    auto cfg = experiment_config_from(file);
    if (const char* env = std::getenv("ALBATCH_SEED"); env && *env) cfg.master_seed = ConfigFile::parse_seed(env, "ALBATCH_SEED");
    if (jobs > 0) cfg.jobs = jobs;
    cfg.validate();

    const auto subjects = load_subjects(data_dir);
    const std::size_t smallest = std::min_element(subjects.begin(), subjects.end(), [](const auto& a, const auto& b) {
                                     return a.size() < b.size();
                                 })->size();
    if (cfg.k * cfg.batches > pool_size(smallest, cfg.pool_fraction))
        throw InputError("M * k exceeds the smallest pool size");

    const auto out = prepare_out_dir(out_dir);
    const auto results = run_experiment(cfg, subjects);
    write_results(results, (out / "results.csv").string());
    write_curves_and_improvements(results, out);
    std::cout << "wrote " << results.size() << " result rows to " << out_dir << "\n";
    return kExitOk;
}

int cmd_stats(const std::string& results_path, const std::string& out_dir, const ComparisonOptions& opts) {
    const auto results = read_results(results_path);
    const auto out = prepare_out_dir(out_dir);
    write_comparison(comparison_table(results, Metric::rmse, opts), (out / "stats_rmse.csv").string());
    write_comparison(comparison_table(results, Metric::cc, opts), (out / "stats_cc.csv").string());
    std::cout << "wrote stats_rmse.csv and stats_cc.csv to " << out_dir << "\n";
    return kExitOk;
}

int cmd_curves(const std::string& results_path, const std::string& out_dir) {
    const auto results = read_results(results_path);
    write_curves_and_improvements(results, prepare_out_dir(out_dir));
    std::cout << "wrote curves.csv and improvement.csv to " << out_dir << "\n";
    return kExitOk;
}

int cmd_features(const std::string& bandpower, const std::string& tau, const std::string& out,
                 const FeaturePipelineOptions& opts) {
    const auto [epochs, powers] = load_band_powers(bandpower);
    const auto response = load_response_times(tau);
    FeatureReport report;
    try {
        report = build_features(epochs, powers, response, opts);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    save_csv(report.data, out);
    std::cout << "kept " << report.pca.components.cols() << " components ("
              << report.pca.variance_ratio_kept * 100.0 << "% variance)";
    if (!report.rejected_channels.empty()) {
        std::cout << "; rejected channels:";
        for (const auto& c : report.rejected_channels) std::cout << ' ' << c;
    }
    std::cout << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pool-based active learning for regression: QBC, EMCM and enhanced batch-mode selection."};
    app.require_subcommand(1);
    app.footer(config_keys_help());

    std::string config, out, data, results, strategies, bandpower, tau;
    std::size_t jobs = 0;
    ComparisonOptions copts;
    std::string family = "per-m";
    FeaturePipelineOptions fopts;

    auto* synth = app.add_subcommand("synth", "Generate synthetic subjects (subject_<i>.csv + meta.csv).");
    synth->add_option("-c,--config", config, "key = value config file")->check(CLI::ExistingFile);
    synth->add_option("-o,--out", out, "output directory")->required();
    synth->footer(config_keys_help());

    auto* run = app.add_subcommand("run", "Run the benchmark; writes results.csv, curves.csv, improvement.csv.");
    run->add_option("-c,--config", config, "key = value config file")->check(CLI::ExistingFile);
    run->add_option("-d,--data", data, "directory of subject_<i>.csv files")->required();
    run->add_option("-o,--out", out, "output directory")->required();
    std::string strategy_help = "comma-separated subset of:";
    for (auto s : kStrategyNames) strategy_help += " " + std::string(s);
    run->add_option("-s,--strategies", strategies, strategy_help);
    run->add_option("-j,--jobs", jobs, "parallel (subject, run) workers; output order does not depend on it");
    run->footer(config_keys_help());

    auto* stats = app.add_subcommand("stats", "Dunn + BH-FDR comparison tables (stats_rmse.csv, stats_cc.csv).");
    stats->add_option("-r,--results", results, "results.csv from `run`")->required();
    stats->add_option("-o,--out", out, "output directory")->required();
    stats->add_option("--alpha", copts.alpha, "significance level")->capture_default_str();
    stats->add_option("--family", family, "FDR family: per-m (six pairs per m) or table (every cell)")
        ->check(CLI::IsMember({"per-m", "table"}))
        ->capture_default_str();
    stats->add_flag("--two-sided", copts.two_sided, "two-sided p-values instead of one-sided");

    auto* curves = app.add_subcommand("curves", "Learning curves and percentage improvements from results.csv.");
    curves->add_option("-r,--results", results, "results.csv from `run`")->required();
    curves->add_option("-o,--out", out, "output directory")->required();

    auto* features = app.add_subcommand("features", "Band powers + response times -> feature dataset CSV.");
    features->add_option("--bandpower", bandpower, "CSV with header epoch,ch_<name>...")->required();
    features->add_option("--tau", tau, "CSV with header epoch,tau")->required();
    features->add_option("-o,--out", out, "output dataset CSV")->required();
    features->add_option("--tau0", fopts.tau0, "response-time offset (s)")->capture_default_str();
    features->add_option("--window", fopts.smoothing_window, "trailing smoothing window (samples)")
        ->capture_default_str();
    features->add_option("--max-db", fopts.max_db, "reject channels peaking above this (dB)")->capture_default_str();
    features->add_option("--variance", fopts.variance_threshold, "PCA variance to keep")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth) return cmd_synth(config, out);
        if (*run) return cmd_run(config, data, out, strategies, jobs);
        if (*stats) {
            copts.family = family == "table" ? CorrectionFamily::whole_table : CorrectionFamily::per_m;
            return cmd_stats(results, out, copts);
        }
        if (*curves) return cmd_curves(results, out);
        if (*features) return cmd_features(bandpower, tau, out, fopts);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
