#pragma once

// Corpus ingestion: vocabulary construction, count/TFIDF features, and
// deterministic train/valid/test splits. All structures are immutable once
// built and safe to share read-only.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nash/common.hpp"
#include "nash/nn.hpp"

namespace nash {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct Vocabulary {
    std::vector<std::string> terms;     // id = position
    std::vector<std::int64_t> doc_freq;  // per-term document frequency

    std::size_t size() const { return terms.size(); }

    std::optional<std::int32_t> id_of(const std::string& term) const {
        auto it = index_.find(term);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    void rebuild_index() {
        index_.clear();
        index_.reserve(terms.size());
        for (std::size_t i = 0; i < terms.size(); ++i)
            index_.emplace(terms[i], static_cast<std::int32_t>(i));
    }

    bool operator==(const Vocabulary& o) const {
        return terms == o.terms && doc_freq == o.doc_freq;
    }

  private:
    std::unordered_map<std::string, std::int32_t> index_;
};

struct DocumentVector {
    std::int32_t doc_id = 0;
    SparseVec entries;  // term id -> weight (TFIDF or counts), ascending ids
    std::vector<std::pair<std::int32_t, std::int32_t>> raw_counts;  // occurrence counts
    std::int32_t label = -1;  // -1 = unlabeled

    bool operator==(const DocumentVector& o) const {
        return doc_id == o.doc_id && entries == o.entries && raw_counts == o.raw_counts &&
               label == o.label;
    }
};

struct Corpus {
    Vocabulary vocab;
    std::vector<DocumentVector> docs;
    std::vector<std::string> label_names;  // index = label id; empty if unlabeled

    bool labeled() const {
        for (const auto& d : docs)
            if (d.label >= 0) return true;
        return false;
    }
    int num_classes() const { return static_cast<int>(label_names.size()); }
};

struct CorpusSplit {
    std::vector<std::int32_t> train, valid, test;  // doc ids, ascending
    std::uint64_t seed = 0;
};

using TokenizedDoc = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Tokenization: lowercase, split on non-alphanumerics, drop tokens shorter
// than two characters. Bytes outside ASCII act as separators.
// ---------------------------------------------------------------------------

inline TokenizedDoc tokenize(std::string_view text) {
    TokenizedDoc out;
    std::string cur;
    for (char ch : text) {
        auto u = static_cast<unsigned char>(ch);
        if (u < 128 && std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            if (cur.size() >= 2) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary construction: the max_size terms with highest document frequency,
// ties broken lexicographically, each with doc_freq >= min_df.
// ---------------------------------------------------------------------------

inline Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::size_t max_size,
                                   std::int64_t min_df = 1) {
    if (docs.empty()) throw CorpusError("build_vocabulary: empty corpus");
    NASH_REQUIRE(max_size >= 1, "build_vocabulary: max_size must be >= 1");

    std::map<std::string, std::int64_t> df;  // ordered: lexicographic tie-break for free
    for (const auto& doc : docs) {
        std::vector<std::string> uniq(doc.begin(), doc.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) ++df[t];
    }
    if (df.empty()) throw CorpusError("build_vocabulary: all documents empty after filtering");

    std::vector<std::pair<std::string, std::int64_t>> ranked;
    ranked.reserve(df.size());
    for (auto& [term, count] : df)
        if (count >= std::max<std::int64_t>(min_df, 1)) ranked.emplace_back(term, count);
    if (ranked.empty()) throw CorpusError("build_vocabulary: no term satisfies min_df");

    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary vocab;
    vocab.terms.reserve(ranked.size());
    vocab.doc_freq.reserve(ranked.size());
    for (auto& [term, count] : ranked) {
        vocab.terms.push_back(term);
        vocab.doc_freq.push_back(count);
    }
    vocab.rebuild_index();
    return vocab;
}

// ---------------------------------------------------------------------------
// TFIDF: weight = tf * (ln((1+N)/(1+df)) + 1), then L2 per document.
// Raw counts are kept unmodified alongside. Documents with no in-vocabulary
// token are excluded (warning on `warnings` when provided).
// ---------------------------------------------------------------------------

inline std::vector<DocumentVector> compute_tfidf(const std::vector<TokenizedDoc>& docs,
                                                 const Vocabulary& vocab,
                                                 const std::vector<std::int32_t>* labels = nullptr,
                                                 std::ostream* warnings = nullptr) {
    const double n_docs = static_cast<double>(docs.size());
    Vec idf(vocab.size());
    for (std::size_t t = 0; t < vocab.size(); ++t)
        idf[t] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(vocab.doc_freq[t]))) + 1.0;

    std::vector<DocumentVector> out;
    out.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<std::int32_t, std::int32_t> counts;
        for (const auto& tok : docs[d]) {
            if (auto id = vocab.id_of(tok)) ++counts[*id];
        }
        if (counts.empty()) {
            if (warnings)
                *warnings << "warning: document " << d << " has no in-vocabulary token, skipped\n";
            continue;
        }
        DocumentVector dv;
        dv.doc_id = static_cast<std::int32_t>(d);
        dv.label = labels ? (*labels)[d] : -1;
        double norm_sq = 0.0;
        for (auto& [t, c] : counts) {
            double w = static_cast<double>(c) * idf[static_cast<std::size_t>(t)];
            dv.entries.emplace_back(t, w);
            dv.raw_counts.emplace_back(t, c);
            norm_sq += w * w;
        }
        double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (auto& [t, w] : dv.entries) w *= inv_norm;
        out.push_back(std::move(dv));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splits: deterministic shuffled partition, stratified by label when labels
// exist. Sizes follow largest-remainder rounding of the ratios; split members
// are listed in ascending doc id order.
// ---------------------------------------------------------------------------

namespace detail {

inline std::array<std::size_t, 3> split_sizes(std::size_t n, double r_train, double r_valid) {
    std::array<double, 3> want = {r_train * static_cast<double>(n),
                                  r_valid * static_cast<double>(n), 0.0};
    want[2] = static_cast<double>(n) - want[0] - want[1];
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> frac{};
    std::size_t used = 0;
    for (int i = 0; i < 3; ++i) {
        sizes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(want[static_cast<std::size_t>(i)]);
        frac[static_cast<std::size_t>(i)] = want[static_cast<std::size_t>(i)] -
                                            static_cast<double>(sizes[static_cast<std::size_t>(i)]);
        used += sizes[static_cast<std::size_t>(i)];
    }
    // Hand leftovers to the largest remainders, earlier split on ties.
    while (used < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[static_cast<std::size_t>(i)] > frac[static_cast<std::size_t>(best)]) best = i;
        ++sizes[static_cast<std::size_t>(best)];
        frac[static_cast<std::size_t>(best)] = -1.0;
        ++used;
    }
    return sizes;
}

}  // namespace detail

inline CorpusSplit split_corpus(const std::vector<DocumentVector>& docs,
                                std::array<double, 3> ratios, std::uint64_t seed) {
    if (docs.size() < 3) throw CorpusError("split_corpus: need at least 3 documents");
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] <= 0.0 || ratios[1] <= 0.0 || ratios[2] <= 0.0 || std::fabs(sum - 1.0) > 1e-9)
        throw CorpusError("split_corpus: ratios must be positive and sum to 1");

    // Group doc ids by label (all in one group when unlabeled).
    std::map<std::int32_t, std::vector<std::int32_t>> groups;
    for (const auto& d : docs) groups[d.label].push_back(d.doc_id);

    CorpusSplit split;
    split.seed = seed;
    for (auto& [label, ids] : groups) {
        std::sort(ids.begin(), ids.end());
        Rng rng(Rng::combine(seed, static_cast<std::uint64_t>(label) + 0x5151));
        rng.shuffle(ids);
        auto sizes = detail::split_sizes(ids.size(), ratios[0], ratios[1]);
        std::size_t at = 0;
        for (std::size_t i = 0; i < sizes[0]; ++i) split.train.push_back(ids[at++]);
        for (std::size_t i = 0; i < sizes[1]; ++i) split.valid.push_back(ids[at++]);
        for (std::size_t i = 0; i < sizes[2]; ++i) split.test.push_back(ids[at++]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.valid.begin(), split.valid.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// ---------------------------------------------------------------------------
// File formats.
//
//   Raw corpus:   one document per line, `<label>\t<text>`; label `-` means
//                 unlabeled.
//   Features:     sparse-triplet text, header `#dims <num_docs> <vocab_size>`
//                 then `<doc_id> <term_id> <weight>` lines.
//   Labels:       `<doc_id> <label_id>` lines.
//   Vocabulary:   one term per line (line number = id), optional `\t<df>`.
//   Split:        `<doc_id>\t<train|valid|test>` lines plus a `#seed` header.
// ---------------------------------------------------------------------------

struct RawCorpus {
    std::vector<TokenizedDoc> docs;
    std::vector<std::int32_t> labels;  // -1 where unlabeled
    std::vector<std::string> label_names;
};

inline RawCorpus read_raw_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    RawCorpus raw;
    std::vector<std::string> label_strings;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw CorpusError("malformed corpus line " + std::to_string(line_no) +
                              ": expected <label>\\t<text>");
        raw.docs.push_back(tokenize(std::string_view(line).substr(tab + 1)));
        label_strings.push_back(trim(line.substr(0, tab)));
    }
    if (raw.docs.empty()) throw CorpusError("empty corpus: " + path);

    // Label ids are assigned by sorted label string, `-` meaning unlabeled.
    std::vector<std::string> uniq;
    for (const auto& s : label_strings)
        if (s != "-") uniq.push_back(s);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    raw.label_names = uniq;
    raw.labels.reserve(label_strings.size());
    for (const auto& s : label_strings) {
        if (s == "-") {
            raw.labels.push_back(-1);
        } else {
            auto it = std::lower_bound(uniq.begin(), uniq.end(), s);
            raw.labels.push_back(static_cast<std::int32_t>(it - uniq.begin()));
        }
    }
    return raw;
}

namespace detail {

inline void write_double(std::ostream& os, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
    os.write(buf, res.ptr - buf);
}

}  // namespace detail

inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write vocabulary file: " + path);
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out << vocab.terms[i] << '\t' << vocab.doc_freq[i] << '\n';
}

inline Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            vocab.terms.push_back(line);
            vocab.doc_freq.push_back(1);  // plain term-per-line file: df unknown
        } else {
            vocab.terms.push_back(line.substr(0, tab));
            vocab.doc_freq.push_back(std::stoll(line.substr(tab + 1)));
        }
    }
    vocab.rebuild_index();
    return vocab;
}

// Writes `entries` weights; pass counts=true to emit raw_counts instead.
inline void save_features(const std::vector<DocumentVector>& docs, std::size_t num_docs,
                          std::size_t vocab_size, const std::string& path, bool counts = false) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write features file: " + path);
    out << "#dims " << num_docs << ' ' << vocab_size << '\n';
    for (const auto& d : docs) {
        if (counts) {
            for (const auto& [t, c] : d.raw_counts) out << d.doc_id << ' ' << t << ' ' << c << '\n';
        } else {
            for (const auto& [t, w] : d.entries) {
                out << d.doc_id << ' ' << t << ' ';
                detail::write_double(out, w);
                out << '\n';
            }
        }
    }
}

inline void save_labels(const std::vector<DocumentVector>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write labels file: " + path);
    for (const auto& d : docs)
        if (d.label >= 0) out << d.doc_id << ' ' << d.label << '\n';
}

struct TripletFile {
    std::size_t num_docs = 0;
    std::size_t vocab_size = 0;
    // doc_id -> sparse row
    std::map<std::int32_t, SparseVec> rows;
};

inline TripletFile read_triplets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open features file: " + path);
    TripletFile tf;
    std::string line;
    std::size_t line_no = 0;
    bool have_dims = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            std::istringstream hs(t.substr(1));
            std::string tag;
            hs >> tag;
            if (tag == "dims") {
                if (!(hs >> tf.num_docs >> tf.vocab_size))
                    throw CorpusError("malformed #dims header at line " + std::to_string(line_no));
                have_dims = true;
            }
            continue;
        }
        std::istringstream ls(t);
        std::int64_t doc = 0, term = 0;
        double weight = 0.0;
        if (!(ls >> doc >> term >> weight) || doc < 0 || term < 0 || weight < 0.0)
            throw CorpusError("malformed triplet at line " + std::to_string(line_no) + ": " + t);
        tf.rows[static_cast<std::int32_t>(doc)].emplace_back(static_cast<std::int32_t>(term),
                                                             weight);
    }
    if (!have_dims) throw CorpusError("features file missing #dims header: " + path);
    for (auto& [doc, row] : tf.rows) {
        std::sort(row.begin(), row.end());
        for (const auto& [term, w] : row)
            if (static_cast<std::size_t>(term) >= tf.vocab_size)
                throw CorpusError("term id out of range in features file: " +
                                  std::to_string(term));
    }
    return tf;
}

inline std::map<std::int32_t, std::int32_t> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file: " + path);
    std::map<std::int32_t, std::int32_t> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        std::int64_t doc = 0, label = 0;
        if (!(ls >> doc >> label) || doc < 0)
            throw CorpusError("malformed label line " + std::to_string(line_no) + ": " + t);
        labels[static_cast<std::int32_t>(doc)] = static_cast<std::int32_t>(label);
    }
    return labels;
}

// Assembles DocumentVectors from triplet features, an optional counts triplet
// file (weights must be nonnegative integers) and an optional labels file.
// Without a counts file, raw_counts fall back to presence counts of 1 per
// nonzero term, which keeps the reconstruction target well defined for
// externally supplied real-valued features.
inline std::vector<DocumentVector> assemble_from_triplets(
    const TripletFile& features, const TripletFile* counts,
    const std::map<std::int32_t, std::int32_t>* labels) {
    std::vector<DocumentVector> docs;
    docs.reserve(features.rows.size());
    for (const auto& [doc_id, row] : features.rows) {
        if (row.empty()) continue;
        DocumentVector dv;
        dv.doc_id = doc_id;
        dv.entries = row;
        if (counts) {
            auto it = counts->rows.find(doc_id);
            if (it == counts->rows.end())
                throw CorpusError("counts file missing document " + std::to_string(doc_id));
            for (const auto& [t, c] : it->second) {
                auto ci = static_cast<std::int32_t>(std::llround(c));
                if (std::fabs(c - static_cast<double>(ci)) > 1e-9 || ci < 0)
                    throw CorpusError("non-integer count for document " + std::to_string(doc_id));
                if (ci > 0) dv.raw_counts.emplace_back(t, ci);
            }
        } else {
            for (const auto& [t, w] : row)
                if (w > 0.0) dv.raw_counts.emplace_back(t, 1);
        }
        if (labels) {
            auto it = labels->find(doc_id);
            dv.label = it == labels->end() ? -1 : it->second;
        }
        if (dv.raw_counts.empty()) continue;
        docs.push_back(std::move(dv));
    }
    return docs;
}

inline void save_split(const CorpusSplit& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write split file: " + path);
    out << "#seed " << split.seed << '\n';
    for (auto id : split.train) out << id << "\ttrain\n";
    for (auto id : split.valid) out << id << "\tvalid\n";
    for (auto id : split.test) out << id << "\ttest\n";
}

inline CorpusSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file: " + path);
    CorpusSplit split;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.rfind("#seed", 0) == 0) {
            split.seed = std::stoull(trim(t.substr(5)));
            continue;
        }
        auto tab = t.find('\t');
        if (tab == std::string::npos) throw CorpusError("malformed split line: " + t);
        auto id = static_cast<std::int32_t>(std::stol(t.substr(0, tab)));
        std::string which = trim(t.substr(tab + 1));
        if (which == "train") split.train.push_back(id);
        else if (which == "valid") split.valid.push_back(id);
        else if (which == "test") split.test.push_back(id);
        else throw CorpusError("unknown split name: " + which);
    }
    return split;
}

inline void save_label_names(const std::vector<std::string>& names, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write label names file: " + path);
    for (const auto& n : names) out << n << '\n';
}

inline std::vector<std::string> load_label_names(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> names;
    if (!in) return names;  // optional artifact
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) names.push_back(line);
    return names;
}

// Lookup helpers used throughout training and evaluation.
inline std::unordered_map<std::int32_t, std::size_t> doc_index_by_id(
    const std::vector<DocumentVector>& docs) {
    std::unordered_map<std::int32_t, std::size_t> by_id;
    by_id.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i)
        by_id.emplace(docs[i].doc_id, i);
    return by_id;
}

}  // namespace nash
