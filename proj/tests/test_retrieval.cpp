#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "nash/retrieval.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace nash;
using namespace nash::testsupport;

namespace {

CodeIndex random_index(std::size_t n, std::uint32_t l, Rng& rng, int n_labels = 0) {
    CodeIndex index;
    index.length = l;
    for (std::size_t i = 0; i < n; ++i) {
        HashCode code(l);
        for (std::uint32_t b = 0; b < l; ++b)
            if (rng.uniform() < 0.5) code.set_bit(b, true);
        index.codes.push_back(code);
        index.doc_ids.push_back(static_cast<std::int32_t>(i));
        index.labels.push_back(n_labels > 0 ? static_cast<std::int32_t>(rng.below(
                                                  static_cast<std::uint64_t>(n_labels)))
                                            : -1);
    }
    return index;
}

}  // namespace

TEST_CASE("hash codes pack and unpack losslessly") {
    Rng rng(17);
    for (std::uint32_t l : {8u, 16u, 32u, 64u, 128u}) {
        for (int trial = 0; trial < 50; ++trial) {
            Vec bits(l);
            for (auto& b : bits) b = rng.uniform() < 0.5 ? 1.0 : 0.0;
            HashCode code = pack_bits(bits);
            REQUIRE(unpack_bits(code) == bits);
            REQUIRE(code.length == l);
            REQUIRE(parse_bitstring(code.to_string()) == code);
        }
    }
}

TEST_CASE("bitstrings print with bit zero first") {
    Vec bits(8, 0.0);
    bits[0] = 1.0;
    bits[6] = 1.0;
    REQUIRE(pack_bits(bits).to_string() == "10000010");
}

TEST_CASE("hamming distance counts differing bits") {
    HashCode a = parse_bitstring("00000000");
    HashCode b = parse_bitstring("00000111");
    REQUIRE(hamming_distance(a, b) == 3);
    REQUIRE(hamming_distance(a, a) == 0);
    HashCode c(16);
    REQUIRE_THROWS_AS(hamming_distance(a, c), ContractError);
}

TEST_CASE("build_index encodes deterministically") {
    TrainConfig cfg;
    cfg.bits = 8;
    cfg.encoder_layers = 1;
    cfg.hidden_units = 6;
    NashParams params;
    Rng rng(3);
    params.init(cfg, 12, 0, rng);

    DocumentVector doc;
    doc.doc_id = 42;
    doc.entries = {{0, 0.5}, {3, 1.0}};
    doc.raw_counts = {{0, 1}, {3, 2}};

    CodeIndex one = build_index(params, {doc}, cfg);
    REQUIRE(one.size() == 1);
    REQUIRE(one.length == 8);
    REQUIRE(one.doc_ids[0] == 42);

    CodeIndex again = build_index(params, {doc}, cfg);
    REQUIRE(one == again);

    // The packed code round-trips the thresholded probabilities.
    auto [h, trace] = encode_probs(params, doc, cfg, nullptr, false);
    REQUIRE(one.codes[0] == binarize_deterministic(h));
}

TEST_CASE("hamming_topk on a hand-countable database") {
    CodeIndex index;
    index.length = 8;
    for (const char* s : {"00000001", "00000111", "11111111"})
        index.codes.push_back(parse_bitstring(s));
    index.doc_ids = {10, 20, 30};
    index.labels = {-1, -1, -1};

    auto result = hamming_topk(index, parse_bitstring("00000000"), 2);
    REQUIRE(result.neighbors.size() == 2);
    REQUIRE(result.neighbors[0] == std::pair<std::int32_t, std::uint32_t>{10, 1});
    REQUIRE(result.neighbors[1] == std::pair<std::int32_t, std::uint32_t>{20, 3});
    REQUIRE_FALSE(result.truncated);
}

TEST_CASE("hamming_topk puts an exact match first") {
    Rng rng(5);
    CodeIndex index = random_index(100, 16, rng);
    auto result = hamming_topk(index, index.codes[37], 5);
    REQUIRE(result.neighbors[0].second == 0);
    // Ties at distance zero resolve by ascending doc id; 37 may not be alone.
    bool found = false;
    for (const auto& [id, d] : result.neighbors)
        if (id == 37 && d == 0) found = true;
    REQUIRE(found);
}

TEST_CASE("hamming_topk with k beyond the database returns everything, flagged") {
    Rng rng(6);
    CodeIndex index = random_index(10, 8, rng);
    auto result = hamming_topk(index, index.codes[0], 50);
    REQUIRE(result.neighbors.size() == 10);
    REQUIRE(result.truncated);
}

TEST_CASE("hamming_topk matches the naive per-bit oracle including tie order") {
    Rng rng(2718);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint32_t l = std::vector<std::uint32_t>{8, 16, 32, 64, 128}[trial % 5];
        std::size_t n = 1 + static_cast<std::size_t>(rng.below(300));
        CodeIndex index = random_index(n, l, rng);
        HashCode query(l);
        for (std::uint32_t b = 0; b < l; ++b)
            if (rng.uniform() < 0.5) query.set_bit(b, true);
        std::size_t k = 1 + static_cast<std::size_t>(rng.below(n));
        auto fast = hamming_topk(index, query, k);
        auto naive = naive_topk(index, query, k);
        REQUIRE(fast.neighbors == naive);
    }
}

TEST_CASE("precision_at_k is 1 on a label-pure database") {
    Rng rng(7);
    CodeIndex db = random_index(50, 16, rng);
    for (auto& l : db.labels) l = 3;
    CodeIndex queries = random_index(10, 16, rng);
    for (auto& l : queries.labels) l = 3;
    REQUIRE(precision_at_k(db, queries, 10) == 1.0);
}

TEST_CASE("precision_at_k sits at chance for label-independent codes") {
    Rng rng(8);
    CodeIndex db = random_index(400, 32, rng, 2);
    CodeIndex queries = random_index(200, 32, rng, 2);
    double p = precision_at_k(db, queries, 50);
    REQUIRE(p > 0.47);
    REQUIRE(p < 0.53);
}

TEST_CASE("precision_at_k rejects unlabeled inputs") {
    Rng rng(9);
    CodeIndex db = random_index(10, 8, rng, 2);
    CodeIndex queries = random_index(5, 8, rng, 2);
    queries.labels[2] = -1;
    REQUIRE_THROWS_AS(precision_at_k(db, queries, 3), RetrievalError);
}

TEST_CASE("precision_at_k is invariant to the thread count") {
    Rng rng(10);
    CodeIndex db = random_index(300, 16, rng, 3);
    CodeIndex queries = random_index(90, 16, rng, 3);
    double p1 = precision_at_k(db, queries, 20, 1);
    double p4 = precision_at_k(db, queries, 20, 4);
    REQUIRE(p1 == p4);
}

TEST_CASE("lsh_baseline gives identical docs identical codes, reproducibly") {
    SyntheticSpec spec;
    spec.n_classes = 2;
    spec.docs_per_class = 20;
    spec.seed = 4;
    Corpus corpus = make_synthetic_corpus(spec);
    corpus.docs.push_back(corpus.docs[0]);
    corpus.docs.back().doc_id = 9999;

    CodeIndex a = lsh_baseline(corpus.docs, corpus.vocab.size(), 16, 123);
    CodeIndex b = lsh_baseline(corpus.docs, corpus.vocab.size(), 16, 123);
    REQUIRE(a.codes == b.codes);
    REQUIRE(a.codes.front() == a.codes.back());

    CodeIndex c = lsh_baseline(corpus.docs, corpus.vocab.size(), 16, 124);
    REQUIRE(a.codes != c.codes);
}

TEST_CASE("results files carry query, rank, doc and distance columns") {
    CodeIndex index;
    index.length = 8;
    index.codes = {parse_bitstring("00000001"), parse_bitstring("00001111")};
    index.doc_ids = {5, 6};
    index.labels = {-1, -1};
    auto r = hamming_topk(index, parse_bitstring("00000000"), 2, 99);
    std::ostringstream out;
    write_results({r}, out);
    REQUIRE(out.str() == "99\t1\t5\t1\n99\t2\t6\t4\n");
}
