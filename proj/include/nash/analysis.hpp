#pragma once

// Qualitative tooling: nearest words in the learned embedding space, hash
// code dumps, and rate/distortion curves extracted from metrics logs.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nash/common.hpp"
#include "nash/corpus.hpp"
#include "nash/model.hpp"

namespace nash {

enum class WordMetric { cosine, euclidean };

struct WordNeighborhood {
    std::string probe;
    std::vector<std::pair<std::string, double>> neighbors;  // (term, distance), nondecreasing
};

namespace detail {

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// Ranks vocabulary terms by distance between embedding vectors (rows of the
// decoder output weight). An out-of-vocabulary probe raises a lookup error
// naming the closest spellings.
inline WordNeighborhood nearest_words(const NashParams& params, const Vocabulary& vocab,
                                      const std::string& probe, std::size_t n = 5,
                                      WordMetric metric = WordMetric::cosine) {
    auto probe_id = vocab.id_of(probe);
    if (!probe_id) {
        std::vector<std::pair<std::size_t, std::string>> near;
        for (const auto& term : vocab.terms) near.emplace_back(detail::levenshtein(probe, term), term);
        std::sort(near.begin(), near.end());
        std::string msg = "word not in vocabulary: " + probe + "; nearest matches:";
        for (std::size_t i = 0; i < std::min<std::size_t>(5, near.size()); ++i)
            msg += " " + near[i].second;
        throw LookupError(msg);
    }
    NASH_REQUIRE(vocab.size() == static_cast<std::size_t>(params.vocab_size),
                 "nearest_words: vocabulary does not match the model");

    const Matrix& emb = params.decoder_out.weight;  // vocab x dim; row = word vector
    auto row = [&emb](std::size_t w) { return emb.row(w); };
    const std::size_t dim = emb.cols;
    auto p = static_cast<std::size_t>(*probe_id);

    double p_norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) p_norm += row(p)[j] * row(p)[j];
    p_norm = std::sqrt(p_norm);

    std::vector<std::pair<double, std::int32_t>> scored;
    scored.reserve(vocab.size() - 1);
    for (std::size_t w = 0; w < vocab.size(); ++w) {
        if (w == p) continue;
        double d = 0.0;
        if (metric == WordMetric::cosine) {
            double ip = 0.0, nw = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                ip += row(p)[j] * row(w)[j];
                nw += row(w)[j] * row(w)[j];
            }
            nw = std::sqrt(nw);
            d = (p_norm == 0.0 || nw == 0.0) ? 1.0 : 1.0 - ip / (p_norm * nw);
        } else {
            for (std::size_t j = 0; j < dim; ++j) {
                double diff = row(p)[j] - row(w)[j];
                d += diff * diff;
            }
            d = std::sqrt(d);
        }
        scored.emplace_back(d, static_cast<std::int32_t>(w));
    }
    std::size_t keep = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end());

    WordNeighborhood out;
    out.probe = probe;
    for (std::size_t i = 0; i < keep; ++i)
        out.neighbors.emplace_back(vocab.terms[static_cast<std::size_t>(scored[i].second)],
                                   scored[i].first);
    return out;
}

// ---------------------------------------------------------------------------
// Code dumps: `<doc_id>\t<label>\t<bitstring>` with deterministic codes.
// The two-column `<doc_id>\t<bitstring>` form is used by `encode`.
// ---------------------------------------------------------------------------

inline void dump_codes(const NashParams& params, const std::vector<DocumentVector>& docs,
                       const TrainConfig& cfg, std::ostream& out, bool with_label = true) {
    for (const auto& doc : docs) {
        HashCode code = encode_code(params, doc, cfg);
        out << doc.doc_id << '\t';
        if (with_label) {
            if (doc.label >= 0) out << doc.label;
            else out << '-';
            out << '\t';
        }
        out << code.to_string() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Rate/distortion curves: per-epoch means of the `rate` and `distortion`
// fields in a metrics log, with the epoch's last iteration as the x value.
// ---------------------------------------------------------------------------

struct CurvePoint {
    std::int64_t iter = 0;
    double rate = 0.0;
    double distortion = 0.0;
};

inline std::map<std::string, std::string> parse_kv_line(const std::string& line) {
    std::map<std::string, std::string> kv;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        auto pos = tok.find('=');
        if (pos == std::string::npos) continue;
        kv[tok.substr(0, pos)] = tok.substr(pos + 1);
    }
    return kv;
}

inline std::vector<CurvePoint> rate_distortion_curve(std::istream& log) {
    struct Acc {
        std::int64_t iter = 0;
        double rate = 0.0, dist = 0.0;
        std::size_t n = 0;
    };
    std::map<std::int64_t, Acc> by_epoch;
    std::string line;
    while (std::getline(log, line)) {
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto kv = parse_kv_line(t);
        if (kv.empty()) continue;
        if (!kv.count("epoch")) throw AnalysisError("metrics record missing epoch field");
        if (!kv.count("rate") || !kv.count("distortion"))
            throw AnalysisError("metrics record missing rate/distortion fields");
        auto& acc = by_epoch[std::stoll(kv.at("epoch"))];
        if (kv.count("iter"))
            acc.iter = std::max(acc.iter, static_cast<std::int64_t>(std::stoll(kv.at("iter"))));
        acc.rate += std::stod(kv.at("rate"));
        acc.dist += std::stod(kv.at("distortion"));
        ++acc.n;
    }
    std::vector<CurvePoint> curve;
    for (const auto& [epoch, acc] : by_epoch)
        curve.push_back({acc.iter, acc.rate / static_cast<double>(acc.n),
                         acc.dist / static_cast<double>(acc.n)});
    return curve;
}

inline void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out) {
    out << "iter,rate_bits,distortion\n";
    char buf[128];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.10g\n", static_cast<long long>(p.iter),
                      p.rate, p.distortion);
        out << buf;
    }
}

}  // namespace nash
