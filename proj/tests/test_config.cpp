#include <gtest/gtest.h>

#include <sstream>

#include "albatch/config.hpp"

using namespace albatch;

namespace {

ConfigFile parse(const std::string& text) {
    std::istringstream in(text);
    return ConfigFile::parse(in);
}

}  // namespace

TEST(Config, ParsesKnownKeys) {
    const auto f = parse("# suite\nsubjects = 3\nnoise_sd=0.2  # inline\n\nstrategies = bl, emcm\nM = 4\n");
    const auto s = synth_config_from(f);
    EXPECT_EQ(s.subjects, 3u);
    EXPECT_DOUBLE_EQ(s.subject.noise_sd, 0.2);
    EXPECT_EQ(s.subject.n_samples, 360u);
    const auto e = experiment_config_from(f);
    EXPECT_EQ(e.strategies, (std::vector<std::string>{"bl", "emcm"}));
    EXPECT_EQ(e.batches, 4u);
    EXPECT_EQ(e.k, 5u);
}

TEST(Config, DefaultsMatchHelpTable) {
    const auto s = synth_config_from(ConfigFile{});
    for (const auto& k : kSynthKeys) {
        const std::string v(k.default_value);
        if (k.name == "noise_sd") {
            EXPECT_DOUBLE_EQ(s.subject.noise_sd, std::stod(v));
        } else if (k.name == "outlier_scale") {
            EXPECT_DOUBLE_EQ(s.subject.outlier_scale, std::stod(v));
        } else if (k.name == "subjects") {
            EXPECT_EQ(s.subjects, std::stoul(v));
        }
    }
    const auto e = experiment_config_from(ConfigFile{});
    EXPECT_EQ(e.runs, 30u);
    EXPECT_EQ(e.strategies, kDefaultStrategies);
    EXPECT_NE(config_keys_help().find("outlier_scale"), std::string::npos);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse("bogus = 1\n"), InputError);
    EXPECT_THROW(parse("k = 1\nk = 2\n"), InputError);
    EXPECT_THROW(parse("k =\n"), InputError);
    EXPECT_THROW(parse("just text\n"), InputError);
    EXPECT_THROW(synth_config_from(parse("subjects = 0\n")), InputError);
    EXPECT_THROW(synth_config_from(parse("subjects = -2\n")), InputError);
    EXPECT_THROW(experiment_config_from(parse("k = two\n")), InputError);
    EXPECT_THROW(ConfigFile::parse_seed("-1", "seed"), InputError);
    EXPECT_THROW(ConfigFile::load("/nonexistent/albatch.conf"), InputError);
}

TEST(Config, SubjectSeedsDiffer) {
    SynthSuiteConfig cfg;
    cfg.subject.n_samples = 20;
    cfg.subject.n_features = 2;
    EXPECT_NE(synth_subject(cfg, 0).data.features, synth_subject(cfg, 1).data.features);
    EXPECT_EQ(synth_subject(cfg, 1).data.features, synth_subject(cfg, 1).data.features);
}
