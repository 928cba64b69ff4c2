#pragma once

// Corpus artifact directory layout shared by the CLI and the test harness:
//
//   vocab.txt            one `term\tdf` per line, line number = id
//   features.tfidf.txt   sparse triplets (encoder inputs)
//   features.counts.txt  sparse triplets (decoder occurrence counts)
//   labels.txt           `<doc_id> <label_id>` lines
//   label_names.txt      label id -> original string
//   split.txt            `<doc_id>\t<train|valid|test>` lines
//   manifest.txt         run manifest (written by the CLI)

#include <filesystem>
#include <string>

#include "nash/common.hpp"
#include "nash/corpus.hpp"

namespace nash {

struct CorpusPaths {
    std::filesystem::path dir;

    explicit CorpusPaths(const std::string& d) : dir(d) {}
    std::string vocab() const { return (dir / "vocab.txt").string(); }
    std::string features() const { return (dir / "features.tfidf.txt").string(); }
    std::string counts() const { return (dir / "features.counts.txt").string(); }
    std::string labels() const { return (dir / "labels.txt").string(); }
    std::string label_names() const { return (dir / "label_names.txt").string(); }
    std::string split() const { return (dir / "split.txt").string(); }
    std::string manifest() const { return (dir / "manifest.txt").string(); }
};

inline void save_corpus_artifacts(const std::string& dir, const Corpus& corpus,
                                  const CorpusSplit& split) {
    CorpusPaths paths(dir);
    std::filesystem::create_directories(paths.dir);
    save_vocabulary(corpus.vocab, paths.vocab());
    save_features(corpus.docs, corpus.docs.size(), corpus.vocab.size(), paths.features(), false);
    save_features(corpus.docs, corpus.docs.size(), corpus.vocab.size(), paths.counts(), true);
    save_labels(corpus.docs, paths.labels());
    save_label_names(corpus.label_names, paths.label_names());
    save_split(split, paths.split());
}

inline std::pair<Corpus, CorpusSplit> load_corpus_artifacts(const std::string& dir) {
    CorpusPaths paths(dir);
    Corpus corpus;
    corpus.vocab = load_vocabulary(paths.vocab());
    auto features = read_triplets(paths.features());
    auto counts = read_triplets(paths.counts());
    std::map<std::int32_t, std::int32_t> labels;
    if (std::filesystem::exists(paths.labels())) labels = read_label_file(paths.labels());
    corpus.docs = assemble_from_triplets(features, &counts, labels.empty() ? nullptr : &labels);
    corpus.label_names = load_label_names(paths.label_names());
    if (features.vocab_size != corpus.vocab.size())
        throw CorpusError("corpus artifacts disagree on vocabulary size in " + dir);
    CorpusSplit split = load_split(paths.split());
    return {std::move(corpus), std::move(split)};
}

// Builds a corpus from a raw `<label>\t<text>` file.
inline Corpus build_corpus_from_raw(const std::string& path, std::size_t max_vocab,
                                    std::int64_t min_df, std::ostream* warnings = nullptr) {
    RawCorpus raw = read_raw_corpus(path);
    Corpus corpus;
    corpus.vocab = build_vocabulary(raw.docs, max_vocab, min_df);
    corpus.docs = compute_tfidf(raw.docs, corpus.vocab, &raw.labels, warnings);
    corpus.label_names = raw.label_names;
    if (corpus.docs.empty()) throw CorpusError("no documents survive preprocessing: " + path);
    return corpus;
}

// Builds a corpus from precomputed triplet features (the drop-in path for
// externally supplied weights). The vocabulary file is optional; ids fall
// back to synthetic `t<id>` terms.
inline Corpus build_corpus_from_triplets(const std::string& features_path,
                                         const std::string& labels_path,
                                         const std::string& counts_path,
                                         const std::string& vocab_path) {
    auto features = read_triplets(features_path);
    TripletFile counts;
    std::map<std::int32_t, std::int32_t> labels;
    if (!labels_path.empty()) labels = read_label_file(labels_path);
    if (!counts_path.empty()) counts = read_triplets(counts_path);

    Corpus corpus;
    if (!vocab_path.empty()) {
        corpus.vocab = load_vocabulary(vocab_path);
        if (corpus.vocab.size() != features.vocab_size)
            throw CorpusError("vocabulary size does not match features header");
    } else {
        corpus.vocab.terms.reserve(features.vocab_size);
        corpus.vocab.doc_freq.assign(features.vocab_size, 0);
        for (std::size_t t = 0; t < features.vocab_size; ++t)
            corpus.vocab.terms.push_back("t" + std::to_string(t));
        for (const auto& [doc, row] : features.rows)
            for (const auto& [t, w] : row)
                if (w > 0.0) ++corpus.vocab.doc_freq[static_cast<std::size_t>(t)];
        for (auto& df : corpus.vocab.doc_freq) df = std::max<std::int64_t>(df, 1);
        corpus.vocab.rebuild_index();
    }
    corpus.docs = assemble_from_triplets(features, counts_path.empty() ? nullptr : &counts,
                                         labels.empty() ? nullptr : &labels);
    if (corpus.docs.empty()) throw CorpusError("features file contains no usable document");
    if (!labels.empty()) {
        std::int32_t max_label = -1;
        for (const auto& [doc, label] : labels) max_label = std::max(max_label, label);
        for (std::int32_t i = 0; i <= max_label; ++i)
            corpus.label_names.push_back("class" + std::to_string(i));
    }
    return corpus;
}

}  // namespace nash
