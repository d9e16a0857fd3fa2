#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "albatch/csv.hpp"
#include "albatch/dataset.hpp"
#include "albatch/error.hpp"
#include "albatch/harness.hpp"

namespace albatch {

struct ConfigKey {
    std::string_view name;
    std::string_view default_value;
    std::string_view help;
};

// clang-format off
inline constexpr ConfigKey kSynthKeys[] = {
    {"subjects",         "15",   "number of synthetic subjects"},
    {"n_samples",        "360",  "samples per subject"},
    {"n_features",       "10",   "feature dimension"},
    {"noise_sd",         "0.1",  "target noise sd before rescaling to [0,1]"},
    {"outlier_fraction", "0.02", "fraction of rows replaced by far-away outliers, in [0,0.5)"},
    {"outlier_scale",    "1.5",  "outlier distance from the cube centre, in cube half-diagonals (> 1)"},
    {"seed",             "0",    "generator seed"},
};

inline constexpr ConfigKey kExperimentKeys[] = {
    {"strategies",    "bl,qbc,eqbc,emcm,eemcm,eemcm1,eemcm2,eemcm3", "comma-separated strategy list"},
    {"k",             "5",    "batch size"},
    {"M",             "12",   "number of batches"},
    {"pool_fraction", "0.8",  "fraction of each subject drawn as the pool per run"},
    {"runs",          "30",   "pool redraws per subject"},
    {"master_seed",   "0",    "master seed (ALBATCH_SEED overrides)"},
    {"sigma",         "0.01", "ridge parameter"},
    {"gamma",         "0.02", "outlier cluster threshold is max(1, gamma * pool size)"},
    {"P",             "4",    "committee size"},
    {"jobs",          "1",    "worker threads (--jobs overrides)"},
};
// clang-format on

/// Help text listing every config key with its default.
inline std::string config_keys_help() {
    std::ostringstream os;
    os << "Config file: one `key = value` per line, `#` starts a comment.\n";
    auto dump = [&](std::string_view title, std::span<const ConfigKey> keys) {
        os << title << ":\n";
        for (const auto& k : keys)
            os << "  " << k.name << std::string(18 - std::min<std::size_t>(17, k.name.size()), ' ') << "(default "
               << k.default_value << ")  " << k.help << "\n";
    };
    dump("Synthetic data keys", kSynthKeys);
    dump("Experiment keys", kExperimentKeys);
    return os.str();
}

class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>") {
        ConfigFile cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            const std::string where = origin + ":" + std::to_string(lineno);
            if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (!is_known(key)) throw InputError(where + ": unknown key '" + key + "'");
            if (value.empty()) throw InputError(where + ": empty value for '" + key + "'");
            if (!cfg.values_.emplace(key, value).second) throw InputError(where + ": duplicate key '" + key + "'");
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open config '" + path + "'");
        return parse(in, path);
    }

    static bool is_known(std::string_view key) {
        for (const auto& k : kSynthKeys)
            if (k.name == key) return true;
        for (const auto& k : kExperimentKeys)
            if (k.name == key) return true;
        return false;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) {
        if (!is_known(key)) throw InputError("unknown key '" + key + "'");
        values_[key] = std::move(value);
    }

    std::size_t get_count(const std::string& key, std::size_t fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto v = csv::parse_int(it->second, key);
        if (v < 0) throw InputError(key + ": must be non-negative");
        return static_cast<std::size_t>(v);
    }

    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_seed(it->second, key);
    }

    double get_real(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : csv::parse_double(it->second, key);
    }

    std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : split_list(it->second);
    }

    static std::uint64_t parse_seed(std::string_view s, std::string_view what) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            throw InputError(std::string(what) + ": not an unsigned integer: '" + std::string(s) + "'");
        return v;
    }

    static std::vector<std::string> split_list(std::string_view s) {
        std::vector<std::string> out;
        for (auto& item : csv::split(s))
            if (!item.empty()) out.push_back(item);
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

struct SynthSuiteConfig {
    std::size_t subjects = 15;
    SynthConfig subject;
};

inline SynthSuiteConfig synth_config_from(const ConfigFile& f) {
    SynthSuiteConfig c;
    c.subjects = f.get_count("subjects", c.subjects);
    c.subject.n_samples = f.get_count("n_samples", c.subject.n_samples);
    c.subject.n_features = f.get_count("n_features", c.subject.n_features);
    c.subject.noise_sd = f.get_real("noise_sd", c.subject.noise_sd);
    c.subject.outlier_fraction = f.get_real("outlier_fraction", c.subject.outlier_fraction);
    c.subject.outlier_scale = f.get_real("outlier_scale", c.subject.outlier_scale);
    c.subject.seed = f.get_seed("seed", c.subject.seed);
    if (c.subjects < 1) throw InputError("subjects must be >= 1");
    c.subject.validate();
    return c;
}

inline ExperimentConfig experiment_config_from(const ConfigFile& f) {
    ExperimentConfig c;
    c.strategies = f.get_list("strategies", c.strategies);
    c.k = f.get_count("k", c.k);
    c.batches = f.get_count("M", c.batches);
    c.pool_fraction = f.get_real("pool_fraction", c.pool_fraction);
    c.runs = f.get_count("runs", c.runs);
    c.master_seed = f.get_seed("master_seed", c.master_seed);
    c.sigma = f.get_real("sigma", c.sigma);
    c.gamma = f.get_real("gamma", c.gamma);
    c.committee_size = f.get_count("P", c.committee_size);
    c.jobs = f.get_count("jobs", c.jobs);
    return c;
}

/// Subject i of a synthetic suite uses seed derive_seed(seed, i).
inline SynthSubject synth_subject(const SynthSuiteConfig& cfg, std::size_t i) {
    SynthConfig sc = cfg.subject;
    sc.seed = derive_seed(cfg.subject.seed, i);
    return synth_generate(sc);
}

}  // namespace albatch
