#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "nash/trainer.hpp"
#include "support/synthetic.hpp"

using namespace nash;
using namespace nash::testsupport;

namespace {

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.bits = 16;
    cfg.hidden_units = 64;
    cfg.batch_size = 32;
    cfg.max_epochs = 8;
    cfg.patience = 20;
    cfg.val_k = 10;
    cfg.binarization = Binarization::stochastic;
    cfg.noise = NoiseMode::none;
    cfg.dropout_keep = 0.9;
    cfg.seed = 1;
    return cfg;
}

Corpus small_corpus(std::uint64_t seed = 11) {
    SyntheticSpec spec;
    spec.n_classes = 3;
    spec.docs_per_class = 50;
    spec.topic_words = 30;
    spec.shared_words = 60;
    spec.doc_len_min = 25;
    spec.doc_len_max = 50;
    spec.seed = seed;
    return make_synthetic_corpus(spec);
}

bool params_equal(const NashParams& a, const NashParams& b) {
    auto aa = nash::detail::params_arrays(a);
    auto bb = nash::detail::params_arrays(b);
    if (aa.size() != bb.size()) return false;
    for (std::size_t i = 0; i < aa.size(); ++i)
        if (aa[i].name != bb[i].name || aa[i].data != bb[i].data) return false;
    return true;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("learning rate decays by 0.96 every 10000 iterations, exactly") {
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    REQUIRE(lr_at(cfg, 0) == 1e-3);
    REQUIRE(lr_at(cfg, 9999) == 1e-3);
    REQUIRE(lr_at(cfg, 10000) == 1e-3 * 0.96);
    REQUIRE(lr_at(cfg, 25000) == 1e-3 * 0.96 * 0.96);
    REQUIRE(lr_at(cfg, 100000) == 1e-3 * std::pow(0.96, 10.0));
}

TEST_CASE("training is bit-identical under a fixed seed") {
    Corpus corpus = small_corpus();
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 5);
    TrainConfig cfg = small_config();
    cfg.max_epochs = 3;

    std::ostringstream log_a, log_b;
    auto [params_a, report_a] = train(corpus, split, cfg, &log_a);
    auto [params_b, report_b] = train(corpus, split, cfg, &log_b);

    REQUIRE(log_a.str() == log_b.str());
    REQUIRE(params_equal(params_a, params_b));
    REQUIRE(report_a.epochs.size() == report_b.epochs.size());
    for (std::size_t e = 0; e < report_a.epochs.size(); ++e) {
        REQUIRE(report_a.epochs[e].loss_recon == report_b.epochs[e].loss_recon);
        REQUIRE(report_a.epochs[e].val_precision == report_b.epochs[e].val_precision);
    }
}

TEST_CASE("training loss drops substantially on a clustered corpus") {
    // Three topical clusters with disjoint vocabularies and skewed word
    // frequencies: total loss should fall by at least 30% within 20 epochs
    // for every seed.
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        SyntheticSpec spec;
        spec.n_classes = 3;
        spec.docs_per_class = 100;
        spec.topic_words = 50;
        spec.shared_words = 100;
        spec.noise_fraction = 0.3;
        spec.zipf_exponent = 1.5;
        spec.seed = 97;
        Corpus corpus = make_synthetic_corpus(spec);
        CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 5);

        TrainConfig cfg = small_config();
        cfg.noise = NoiseMode::data_dependent;
        cfg.hidden_units = 128;
        cfg.batch_size = 10;
        cfg.learning_rate = 3e-3;
        cfg.max_epochs = 20;
        cfg.patience = 50;
        cfg.seed = seed;
        std::ostringstream log;
        auto [params, report] = train(corpus, split, cfg, &log);
        REQUIRE(report.epochs.size() >= 2);
        double first = report.epochs.front().loss_recon + report.epochs.front().loss_kl;
        double last = report.epochs.back().loss_recon + report.epochs.back().loss_kl;
        INFO("seed " << seed << " first " << first << " last " << last);
        REQUIRE(last < 0.7 * first);
    }
}

TEST_CASE("validate scores a label-pure database at 1.0") {
    Corpus corpus = small_corpus();
    // Collapse every label so all retrieved documents count as relevant.
    for (auto& d : corpus.docs) d.label = 0;
    corpus.label_names = {"only"};
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 3);
    TrainConfig cfg = small_config();
    NashParams params;
    Rng rng(2);
    params.init(cfg, static_cast<int>(corpus.vocab.size()), 0, rng);
    REQUIRE(validate(params, corpus, split, cfg, 10) == 1.0);
}

TEST_CASE("validate requires labels and a nonempty split") {
    Corpus corpus = small_corpus();
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 3);
    TrainConfig cfg = small_config();
    NashParams params;
    Rng rng(2);
    params.init(cfg, static_cast<int>(corpus.vocab.size()), 0, rng);

    CorpusSplit empty = split;
    empty.valid.clear();
    REQUIRE_THROWS_AS(validate(params, corpus, empty, cfg, 10), ValidationError);

    Corpus unlabeled = corpus;
    for (auto& d : unlabeled.docs) d.label = -1;
    REQUIRE_THROWS_AS(validate(params, unlabeled, split, cfg, 10), ValidationError);
}

TEST_CASE("unlabeled corpora fall back to the final-epoch model with a note") {
    Corpus corpus = small_corpus();
    for (auto& d : corpus.docs) d.label = -1;
    corpus.label_names.clear();
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 3);
    TrainConfig cfg = small_config();
    cfg.max_epochs = 2;
    std::ostringstream log;
    auto [params, report] = train(corpus, split, cfg, &log);
    REQUIRE(report.no_validation);
    REQUIRE(log.str().find("final-epoch model") != std::string::npos);
}

TEST_CASE("divergent training aborts and keeps the last good parameters") {
    Corpus corpus = small_corpus();
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 3);
    TrainConfig cfg = small_config();
    cfg.learning_rate = 1e150;  // guaranteed blow-up
    cfg.max_epochs = 4;
    std::ostringstream log;
    auto [params, report] = train(corpus, split, cfg, &log);
    REQUIRE(report.diverged);
    auto arrays = nash::detail::params_arrays(params);
    for (const auto& a : arrays)
        for (double v : a.data) REQUIRE(std::isfinite(v));
}

TEST_CASE("checkpoints round-trip parameters and config") {
    Corpus corpus = small_corpus();
    TrainConfig cfg = small_config();
    cfg.noise = NoiseMode::data_dependent;
    NashParams params;
    Rng rng(44);
    params.init(cfg, static_cast<int>(corpus.vocab.size()), 0, rng);

    auto path = temp_path("nash_ckpt_rt.bin");
    save_checkpoint(path, params, cfg);
    auto [loaded, loaded_cfg] = load_checkpoint(path);
    REQUIRE(params_equal(params, loaded));
    REQUIRE(loaded_cfg.serialize() == cfg.serialize());
    std::remove(path.c_str());
}

TEST_CASE("restoring training state resumes bit-identically") {
    Corpus corpus = small_corpus();
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 5);
    TrainConfig cfg = small_config();
    cfg.max_epochs = 5;

    // Uninterrupted run.
    TrainState straight = init_train_state(corpus, cfg);
    train_loop(straight, corpus, split, cfg);

    // Interrupted at epoch 2, persisted, reloaded, continued.
    TrainConfig first_leg = cfg;
    first_leg.max_epochs = 2;
    TrainState state = init_train_state(corpus, first_leg);
    train_loop(state, corpus, split, first_leg);
    auto path = temp_path("nash_state_rt.bin");
    save_train_state(path, state, cfg);
    auto [resumed, resumed_cfg] = load_train_state(path);
    REQUIRE(resumed_cfg.serialize() == cfg.serialize());
    train_loop(resumed, corpus, split, cfg);

    REQUIRE(params_equal(straight.params, resumed.params));
    REQUIRE(straight.iter == resumed.iter);
    REQUIRE(straight.best_val == resumed.best_val);
    std::remove(path.c_str());
}

TEST_CASE("metrics lines carry every field in a stable order") {
    EpochMetrics m;
    m.epoch = 2;
    m.iter = 17;
    m.loss_recon = 1.5;
    m.lr = 1e-3;
    m.val_precision = 0.25;
    m.rate = 3.5;
    m.rate_max = 4.0;
    std::string line = m.to_line();
    for (const char* key : {"epoch=", "iter=", "loss_recon=", "loss_kl=", "loss_dis=", "lr=",
                            "val_precision=", "rate=", "rate_sampled=", "rate_max=", "distortion="})
        REQUIRE(line.find(key) != std::string::npos);
}
