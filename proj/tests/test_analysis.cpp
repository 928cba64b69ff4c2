#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "nash/analysis.hpp"
#include "nash/trainer.hpp"
#include "support/synthetic.hpp"

using namespace nash;
using namespace nash::testsupport;

namespace {

// Model whose embedding rows are set directly.
NashParams embedding_fixture(const std::vector<Vec>& rows, int bits) {
    TrainConfig cfg;
    cfg.bits = bits;
    cfg.encoder_layers = 0;
    cfg.hidden_units = 4;
    NashParams p;
    Rng rng(1);
    p.init(cfg, static_cast<int>(rows.size()), 0, rng);
    for (std::size_t w = 0; w < rows.size(); ++w)
        for (std::size_t j = 0; j < static_cast<std::size_t>(bits); ++j)
            p.decoder_out.weight(w, j) = rows[w][j];
    return p;
}

Vocabulary small_vocab(std::initializer_list<const char*> terms) {
    Vocabulary v;
    for (const char* t : terms) {
        v.terms.push_back(t);
        v.doc_freq.push_back(1);
    }
    v.rebuild_index();
    return v;
}

}  // namespace

TEST_CASE("nearest_words finds identical embeddings at distance zero") {
    auto p = embedding_fixture({{1.0, 2.0}, {0.0, 1.0}, {1.0, 2.0}}, 2);
    auto vocab = small_vocab({"alpha", "beta", "alphatwin"});
    auto hood = nearest_words(p, vocab, "alpha", 2);
    REQUIRE(hood.probe == "alpha");
    REQUIRE(hood.neighbors[0].first == "alphatwin");
    REQUIRE(hood.neighbors[0].second == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(hood.neighbors[1].second > hood.neighbors[0].second);
}

TEST_CASE("orthogonal embeddings sit at cosine distance one") {
    auto p = embedding_fixture({{1.0, 0.0}, {0.0, 1.0}}, 2);
    auto vocab = small_vocab({"aa", "bb"});
    auto hood = nearest_words(p, vocab, "aa", 1);
    REQUIRE(hood.neighbors[0].second == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nearest_words is invariant to uniform rescaling of the embeddings") {
    std::vector<Vec> rows = {{0.3, -1.0}, {0.5, 0.2}, {-0.4, 0.9}, {1.0, 1.0}};
    auto p1 = embedding_fixture(rows, 2);
    for (auto& r : rows)
        for (auto& v : r) v *= 37.5;
    auto p2 = embedding_fixture(rows, 2);
    auto vocab = small_vocab({"aa", "bb", "cc", "dd"});
    auto h1 = nearest_words(p1, vocab, "bb", 3);
    auto h2 = nearest_words(p2, vocab, "bb", 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(h1.neighbors[i].first == h2.neighbors[i].first);
        REQUIRE(h1.neighbors[i].second == Catch::Approx(h2.neighbors[i].second).margin(1e-12));
    }
}

TEST_CASE("out-of-vocabulary probes raise a lookup error naming close spellings") {
    auto p = embedding_fixture({{1.0, 0.0}, {0.0, 1.0}}, 2);
    auto vocab = small_vocab({"weapon", "medical"});
    try {
        nearest_words(p, vocab, "waepon", 1);
        FAIL("expected LookupError");
    } catch (const LookupError& e) {
        REQUIRE(std::string(e.what()).find("weapon") != std::string::npos);
    }
}

TEST_CASE("euclidean metric is exposed as an alternative") {
    // Same direction, different magnitude: cosine says identical, euclidean
    // prefers the closer vector.
    auto p = embedding_fixture({{1.0, 0.0}, {10.0, 0.0}, {1.2, 0.1}}, 2);
    auto vocab = small_vocab({"probe", "far", "near"});
    auto cos_hood = nearest_words(p, vocab, "probe", 1, WordMetric::cosine);
    REQUIRE(cos_hood.neighbors[0].first == "far");
    auto euc_hood = nearest_words(p, vocab, "probe", 1, WordMetric::euclidean);
    REQUIRE(euc_hood.neighbors[0].first == "near");
}

TEST_CASE("dump_codes emits one tab-separated line per document") {
    TrainConfig cfg;
    cfg.bits = 8;
    cfg.encoder_layers = 0;
    NashParams p;
    Rng rng(5);
    p.init(cfg, 6, 0, rng);

    DocumentVector labeled;
    labeled.doc_id = 3;
    labeled.entries = {{0, 1.0}};
    labeled.raw_counts = {{0, 1}};
    labeled.label = 2;
    DocumentVector unlabeled = labeled;
    unlabeled.doc_id = 4;
    unlabeled.label = -1;

    std::ostringstream out;
    dump_codes(p, {labeled, unlabeled}, cfg, out, true);
    auto lines = split(out.str(), '\n');
    REQUIRE(lines[0].substr(0, 4) == "3\t2\t");
    REQUIRE(lines[0].size() == 4 + 8);
    REQUIRE(lines[1].substr(0, 4) == "4\t-\t");

    std::ostringstream out2;
    dump_codes(p, {labeled}, cfg, out2, true);
    std::ostringstream out3;
    dump_codes(p, {labeled}, cfg, out3, true);
    REQUIRE(out2.str() == out3.str());

    std::ostringstream plain;
    dump_codes(p, {labeled}, cfg, plain, false);
    REQUIRE(plain.str().substr(0, 2) == "3\t");
}

TEST_CASE("trained codes separate clusters in Hamming space") {
    SyntheticSpec spec;
    spec.n_classes = 3;
    spec.docs_per_class = 60;
    spec.topic_words = 40;
    spec.shared_words = 80;
    spec.seed = 31;
    Corpus corpus = make_synthetic_corpus(spec);
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 7);

    TrainConfig cfg;
    cfg.bits = 16;
    cfg.hidden_units = 64;
    cfg.batch_size = 32;
    cfg.max_epochs = 12;
    cfg.patience = 50;
    cfg.val_k = 10;
    cfg.noise = NoiseMode::data_dependent;
    cfg.dropout_keep = 0.9;
    cfg.seed = 1;
    auto [params, report] = train(corpus, split, cfg);

    CodeIndex index = build_index(params, corpus.docs, cfg);
    double intra = 0.0, inter = 0.0;
    std::size_t n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        for (std::size_t j = i + 1; j < index.size(); ++j) {
            double d = hamming_distance(index.codes[i], index.codes[j]);
            if (index.labels[i] == index.labels[j]) {
                intra += d;
                ++n_intra;
            } else {
                inter += d;
                ++n_inter;
            }
        }
    }
    intra /= static_cast<double>(n_intra);
    inter /= static_cast<double>(n_inter);
    INFO("intra " << intra << " inter " << inter);
    REQUIRE(intra < inter);
}

TEST_CASE("planted co-occurring word pairs end up as embedding neighbors") {
    // Every second document of class k is rewritten as a planted micro-topic:
    // shared noise words plus eight occurrences each of `c<k>p0` and `c<k>p1`,
    // which only ever appear together. Their embedding rows align with the
    // micro-topic's code direction, so the partners should be mutual top-5
    // neighbors for most pairs across seeds.
    SyntheticSpec spec;
    spec.n_classes = 3;
    spec.docs_per_class = 80;
    spec.topic_words = 20;
    spec.shared_words = 40;
    spec.seed = 51;

    int mutual = 0, total = 0;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        SyntheticCorpus raw = make_synthetic(spec);
        for (std::size_t d = 0; d < raw.docs.size(); ++d) {
            if (d % 2 != 0) continue;
            std::string klass = std::to_string(raw.labels[d]);
            TokenizedDoc doc;
            for (const auto& tok : raw.docs[d])
                if (tok.rfind("sw", 0) == 0) doc.push_back(tok);
            for (int rep = 0; rep < 8; ++rep) {
                doc.push_back("c" + klass + "p0");
                doc.push_back("c" + klass + "p1");
            }
            raw.docs[d] = doc;
        }
        Corpus corpus;
        corpus.vocab = build_vocabulary(raw.docs, 200, 1);
        corpus.docs = compute_tfidf(raw.docs, corpus.vocab, &raw.labels);
        corpus.label_names = raw.label_names;
        CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 7);

        TrainConfig cfg;
        cfg.bits = 16;
        cfg.hidden_units = 64;
        cfg.batch_size = 4;
        cfg.learning_rate = 2e-3;
        cfg.max_epochs = 50;
        cfg.patience = 1000;
        cfg.val_k = 10;
        cfg.dropout_keep = 1.0;
        cfg.binarization = Binarization::deterministic;
        cfg.seed = seed;
        auto [params, report] = train(corpus, split, cfg);

        for (int c = 0; c < 3; ++c) {
            std::string a = "c" + std::to_string(c) + "p0";
            std::string b = "c" + std::to_string(c) + "p1";
            for (const auto& [probe, partner] : {std::pair{a, b}, std::pair{b, a}}) {
                auto hood = nearest_words(params, corpus.vocab, probe, 5);
                ++total;
                for (const auto& [term, dist] : hood.neighbors)
                    if (term == partner) {
                        ++mutual;
                        break;
                    }
            }
        }
    }
    INFO("mutual " << mutual << " of " << total);
    REQUIRE(static_cast<double>(mutual) >= 0.8 * static_cast<double>(total));
}

TEST_CASE("rate_distortion_curve parses, aggregates and bounds") {
    SECTION("empty log gives an empty table with a header") {
        std::istringstream in("");
        auto curve = rate_distortion_curve(in);
        REQUIRE(curve.empty());
        std::ostringstream out;
        write_curve_csv(curve, out);
        REQUIRE(out.str() == "iter,rate_bits,distortion\n");
    }
    SECTION("a single record is echoed") {
        std::istringstream in("epoch=0 iter=12 rate=3.25 distortion=0.5\n");
        auto curve = rate_distortion_curve(in);
        REQUIRE(curve.size() == 1);
        REQUIRE(curve[0].iter == 12);
        REQUIRE(curve[0].rate == 3.25);
        REQUIRE(curve[0].distortion == 0.5);
    }
    SECTION("records within an epoch average; iter takes the latest") {
        std::istringstream in(
            "epoch=0 iter=5 rate=2.0 distortion=1.0\n"
            "epoch=0 iter=10 rate=4.0 distortion=3.0\n"
            "epoch=1 iter=20 rate=1.0 distortion=0.5\n");
        auto curve = rate_distortion_curve(in);
        REQUIRE(curve.size() == 2);
        REQUIRE(curve[0].iter == 10);
        REQUIRE(curve[0].rate == 3.0);
        REQUIRE(curve[0].distortion == 2.0);
    }
    SECTION("missing fields raise an analysis error") {
        std::istringstream in("epoch=0 iter=5 distortion=1.0\n");
        REQUIRE_THROWS_AS(rate_distortion_curve(in), AnalysisError);
    }
    SECTION("comments and blank lines are skipped") {
        std::istringstream in("# header\n\nepoch=0 iter=1 rate=2.0 distortion=1.0\n");
        auto curve = rate_distortion_curve(in);
        REQUIRE(curve.size() == 1);
    }
}

TEST_CASE("logged MAP rate never exceeds the code length on a training run") {
    SyntheticSpec spec;
    spec.n_classes = 2;
    spec.docs_per_class = 40;
    spec.topic_words = 20;
    spec.shared_words = 40;
    spec.seed = 61;
    Corpus corpus = make_synthetic_corpus(spec);
    CorpusSplit split = split_corpus(corpus.docs, {0.8, 0.1, 0.1}, 7);

    TrainConfig cfg;
    cfg.bits = 16;
    cfg.hidden_units = 32;
    cfg.batch_size = 16;
    cfg.max_epochs = 5;
    cfg.patience = 50;
    cfg.val_k = 10;
    cfg.seed = 3;
    std::ostringstream log;
    auto [params, report] = train(corpus, split, cfg, &log);
    REQUIRE(!report.epochs.empty());
    for (const auto& m : report.epochs) {
        REQUIRE(m.rate_max <= 16.0 + 1e-9);
        REQUIRE(m.rate <= m.rate_max + 1e-12);
    }

    std::istringstream in(log.str());
    auto curve = rate_distortion_curve(in);
    REQUIRE(curve.size() == report.epochs.size());
    for (const auto& p : curve) REQUIRE(p.rate <= 16.0 + 1e-9);
}
