#pragma once

// Synthetic topical corpora for tests: K classes with disjoint topic
// vocabularies plus a shared noise pool. Word frequencies follow a Zipf-like
// profile within each pool so document frequencies spread realistically.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nash/artifacts.hpp"
#include "nash/common.hpp"
#include "nash/corpus.hpp"

namespace nash::testsupport {

struct SyntheticSpec {
    int n_classes = 3;
    int docs_per_class = 100;
    int topic_words = 50;        // per class, disjoint across classes
    int shared_words = 100;      // noise pool common to all classes
    int doc_len_min = 40;
    int doc_len_max = 80;
    double noise_fraction = 0.5;  // probability a token comes from the shared pool
    double zipf_exponent = 1.0;   // steeper = more skewed within-pool frequencies
    // Topical tokens come from a per-document secondary class with this
    // probability; blurs class boundaries the way cross-posted news does.
    double mixture = 0.0;
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    std::vector<TokenizedDoc> docs;
    std::vector<std::int32_t> labels;
    std::vector<std::string> label_names;
};

namespace detail {

// Zipf sampler over [0, n): p(rank) ~ 1/(rank+1).
class ZipfPool {
  public:
    ZipfPool(int n, double exponent) : cumulative_(static_cast<std::size_t>(n)) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cumulative_[static_cast<std::size_t>(i)] = total;
        }
        for (auto& c : cumulative_) c /= total;
    }

    int sample(Rng& rng) const {
        double u = rng.uniform();
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) return static_cast<int>(cumulative_.size()) - 1;
        return static_cast<int>(it - cumulative_.begin());
    }

  private:
    std::vector<double> cumulative_;
};

}  // namespace detail

inline SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
    SyntheticCorpus out;
    Rng rng(Rng::combine(spec.seed, 0x59717ULL));
    detail::ZipfPool topic_pool(spec.topic_words, spec.zipf_exponent);
    detail::ZipfPool shared_pool(spec.shared_words, spec.zipf_exponent);

    for (int c = 0; c < spec.n_classes; ++c)
        out.label_names.push_back("class" + std::to_string(c));

    for (int c = 0; c < spec.n_classes; ++c) {
        for (int d = 0; d < spec.docs_per_class; ++d) {
            int len = spec.doc_len_min +
                      static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(spec.doc_len_max - spec.doc_len_min + 1)));
            int secondary = c;
            if (spec.n_classes > 1) {
                secondary = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n_classes - 1)));
                if (secondary >= c) ++secondary;
            }
            TokenizedDoc doc;
            doc.reserve(static_cast<std::size_t>(len));
            for (int t = 0; t < len; ++t) {
                if (rng.uniform() < spec.noise_fraction) {
                    doc.push_back("sw" + std::to_string(shared_pool.sample(rng)));
                } else {
                    int topic = rng.uniform() < spec.mixture ? secondary : c;
                    doc.push_back("c" + std::to_string(topic) + "w" +
                                  std::to_string(topic_pool.sample(rng)));
                }
            }
            out.docs.push_back(std::move(doc));
            out.labels.push_back(c);
        }
    }
    return out;
}

inline Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
    SyntheticCorpus raw = make_synthetic(spec);
    Corpus corpus;
    std::size_t max_vocab = static_cast<std::size_t>(spec.n_classes) *
                                static_cast<std::size_t>(spec.topic_words) +
                            static_cast<std::size_t>(spec.shared_words);
    corpus.vocab = build_vocabulary(raw.docs, max_vocab, 1);
    corpus.docs = compute_tfidf(raw.docs, corpus.vocab, &raw.labels, nullptr);
    corpus.label_names = raw.label_names;
    return corpus;
}

// Raw `<label>\t<text>` file for CLI round trips.
inline void write_raw_file(const SyntheticCorpus& raw, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write raw corpus: " + path);
    for (std::size_t i = 0; i < raw.docs.size(); ++i) {
        out << raw.label_names[static_cast<std::size_t>(raw.labels[i])] << '\t';
        for (std::size_t t = 0; t < raw.docs[i].size(); ++t) {
            if (t) out << ' ';
            out << raw.docs[i][t];
        }
        out << '\n';
    }
}

}  // namespace nash::testsupport
