#pragma once

// Hamming-distance retrieval: packed code indices, exact k-nearest scans with
// bit-parallel popcount, precision@K, and a random-projection baseline.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <thread>
#include <vector>

#include "nash/common.hpp"
#include "nash/corpus.hpp"
#include "nash/hashcode.hpp"
#include "nash/model.hpp"

namespace nash {

struct RetrievalError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// CodeIndex: immutable once built.
// ---------------------------------------------------------------------------

struct CodeIndex {
    std::uint32_t length = 0;  // l
    std::vector<HashCode> codes;
    std::vector<std::int32_t> doc_ids;
    std::vector<std::int32_t> labels;  // -1 where unlabeled

    std::size_t size() const { return codes.size(); }

    bool operator==(const CodeIndex& o) const {
        return length == o.length && codes == o.codes && doc_ids == o.doc_ids &&
               labels == o.labels;
    }
};

// Encodes every document with dropout off and the deterministic threshold.
inline CodeIndex build_index(const NashParams& params, const std::vector<DocumentVector>& docs,
                             const TrainConfig& cfg) {
    NASH_REQUIRE(!docs.empty(), "build_index: no documents");
    CodeIndex index;
    index.length = static_cast<std::uint32_t>(params.bits);
    index.codes.reserve(docs.size());
    index.doc_ids.reserve(docs.size());
    index.labels.reserve(docs.size());
    for (const auto& doc : docs) {
        index.codes.push_back(encode_code(params, doc, cfg));
        index.doc_ids.push_back(doc.doc_id);
        index.labels.push_back(doc.label);
    }
    return index;
}

// ---------------------------------------------------------------------------
// Exact k-nearest by Hamming distance. Full linear scan; ties broken by
// ascending doc id; when k exceeds the database size all documents are
// returned and the result is flagged.
// ---------------------------------------------------------------------------

struct RetrievalResult {
    std::int32_t query_id = 0;
    std::vector<std::pair<std::int32_t, std::uint32_t>> neighbors;  // (doc_id, distance)
    std::size_t k = 0;
    bool truncated = false;  // k was larger than the database
};

inline RetrievalResult hamming_topk(const CodeIndex& index, const HashCode& query, std::size_t k,
                                    std::int32_t query_id = -1) {
    NASH_REQUIRE(query.length == index.length, "hamming_topk: query length mismatch");
    NASH_REQUIRE(k >= 1, "hamming_topk: k must be >= 1");
    const std::size_t n = index.size();

    std::vector<std::pair<std::uint32_t, std::int32_t>> scored(n);  // (distance, doc_id)
    for (std::size_t i = 0; i < n; ++i)
        scored[i] = {hamming_distance(index.codes[i], query), index.doc_ids[i]};

    RetrievalResult result;
    result.query_id = query_id;
    result.k = k;
    if (k >= n) {
        result.truncated = k > n;
        std::sort(scored.begin(), scored.end());
        for (const auto& [d, id] : scored) result.neighbors.emplace_back(id, d);
        return result;
    }
    std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                     scored.end());
    std::sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k));
    result.neighbors.reserve(k);
    for (std::size_t i = 0; i < k; ++i) result.neighbors.emplace_back(scored[i].second, scored[i].first);
    return result;
}

// ---------------------------------------------------------------------------
// precision@K: fraction of the K nearest database documents sharing the
// query's label, averaged over queries. Queries may fan out over threads;
// per-query fractions land in query order so the mean is thread-invariant.
// ---------------------------------------------------------------------------

inline double precision_at_k(const CodeIndex& database, const CodeIndex& queries, std::size_t k,
                             int threads = 1) {
    NASH_REQUIRE(queries.size() > 0 && database.size() > 0, "precision_at_k: empty input");
    for (auto l : database.labels)
        if (l < 0) throw RetrievalError("precision_at_k: unlabeled database document");
    for (auto l : queries.labels)
        if (l < 0) throw RetrievalError("precision_at_k: unlabeled query document");

    const std::size_t nq = queries.size();
    std::vector<double> fraction(nq, 0.0);

    // hamming_topk returns doc ids; map ids to labels once.
    std::unordered_map<std::int32_t, std::int32_t> label_of;
    label_of.reserve(database.size());
    for (std::size_t i = 0; i < database.size(); ++i)
        label_of.emplace(database.doc_ids[i], database.labels[i]);

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            auto result = hamming_topk(database, queries.codes[q], k, queries.doc_ids[q]);
            std::size_t hits = 0;
            for (const auto& [id, dist] : result.neighbors) {
                (void)dist;
                if (label_of.at(id) == queries.labels[q]) ++hits;
            }
            fraction[q] =
                static_cast<double>(hits) / static_cast<double>(result.neighbors.size());
        }
    };

    int n_threads = std::max(1, threads);
    if (n_threads == 1 || nq < 2) {
        worker(0, nq);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (nq + static_cast<std::size_t>(n_threads) - 1) /
                            static_cast<std::size_t>(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            std::size_t begin = static_cast<std::size_t>(t) * chunk;
            std::size_t end = std::min(nq, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0;
    for (double f : fraction) sum += f;
    return sum / static_cast<double>(nq);
}

// Convenience overload: encode both sides with the trained model first.
inline double precision_at_k(const NashParams& params, const std::vector<DocumentVector>& queries,
                             const std::vector<DocumentVector>& database, const TrainConfig& cfg,
                             std::size_t k = 100, int threads = 1) {
    return precision_at_k(build_index(params, database, cfg), build_index(params, queries, cfg), k,
                          threads);
}

// ---------------------------------------------------------------------------
// Random-projection baseline: bit i = sign of a seeded Gaussian projection of
// the feature row.
// ---------------------------------------------------------------------------

inline CodeIndex lsh_baseline(const std::vector<DocumentVector>& docs, std::size_t vocab_size,
                              std::uint32_t l, std::uint64_t seed) {
    NASH_REQUIRE(l >= 1 && l <= HashCode::max_bits, "lsh_baseline: bad code length");
    Rng rng(Rng::combine(seed, 0x15A5ULL));
    Matrix projection(l, vocab_size);
    for (double& w : projection.data) w = rng.normal();

    CodeIndex index;
    index.length = l;
    for (const auto& doc : docs) {
        HashCode code(l);
        for (std::uint32_t i = 0; i < l; ++i) {
            double ip = 0.0;
            const double* row = projection.row(i);
            for (const auto& [t, v] : doc.entries) ip += row[static_cast<std::size_t>(t)] * v;
            if (ip >= 0.0) code.set_bit(i, true);
        }
        index.codes.push_back(code);
        index.doc_ids.push_back(doc.doc_id);
        index.labels.push_back(doc.label);
    }
    return index;
}

// ---------------------------------------------------------------------------
// Results file: `<query_id>\t<rank>\t<doc_id>\t<distance>` rows.
// ---------------------------------------------------------------------------

inline void write_results(const std::vector<RetrievalResult>& results, std::ostream& out) {
    for (const auto& r : results) {
        std::size_t rank = 1;
        for (const auto& [id, dist] : r.neighbors)
            out << r.query_id << '\t' << rank++ << '\t' << id << '\t' << dist << '\n';
    }
}

}  // namespace nash
