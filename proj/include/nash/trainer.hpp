#pragma once

// Mini-batch training loop: epoch shuffling, Adam with step decay, per-epoch
// validation (precision@K of validation queries against the training set),
// early stopping, best-model selection, and metrics logging. Everything is
// derived from the run seed, so a fixed seed reproduces runs bit for bit.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "nash/checkpoint.hpp"
#include "nash/common.hpp"
#include "nash/config.hpp"
#include "nash/corpus.hpp"
#include "nash/model.hpp"
#include "nash/retrieval.hpp"

namespace nash {

struct ValidationError : Error {
    using Error::Error;
};

struct EpochMetrics {
    int epoch = 0;
    std::int64_t iter = 0;
    double loss_recon = 0.0;
    double loss_kl = 0.0;
    double loss_dis = 0.0;
    double lr = 0.0;
    double val_precision = 0.0;
    double rate = 0.0;          // mean MAP-code rate, bits
    double rate_sampled = 0.0;  // mean rate at the sampled code
    double rate_max = 0.0;      // max per-document MAP-code rate in the epoch
    double distortion = 0.0;

    // Stable key=value line; same doubles give the same bytes.
    std::string to_line() const {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "epoch=%d iter=%lld loss_recon=%.10g loss_kl=%.10g loss_dis=%.10g "
                      "lr=%.10g val_precision=%.6f rate=%.6f rate_sampled=%.6f rate_max=%.6f "
                      "distortion=%.10g",
                      epoch, static_cast<long long>(iter), loss_recon, loss_kl, loss_dis, lr,
                      val_precision, rate, rate_sampled, rate_max, distortion);
        return std::string(buf);
    }
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
    int best_epoch = -1;
    double best_val = -1.0;
    bool diverged = false;
    bool no_validation = false;  // fell back to the final-epoch model
    double wall_seconds = 0.0;   // informational; never serialized
};

// Full optimization state; checkpointing this at an epoch boundary lets a run
// resume to bit-identical subsequent steps.
struct TrainState {
    NashParams params;
    AdamState adam;
    NashParams best_params;
    bool has_best = false;
    double best_val = -1.0;
    int best_epoch = -1;
    int next_epoch = 0;
    std::int64_t iter = 0;
    int stale_validations = 0;
};

inline double lr_at(const TrainConfig& cfg, std::int64_t iter) {
    auto steps = static_cast<double>(iter / cfg.lr_decay_every);
    return cfg.learning_rate * std::pow(cfg.lr_decay, steps);
}

// precision@k of validation queries against the training database.
inline double validate(const NashParams& params, const Corpus& corpus, const CorpusSplit& split,
                       const TrainConfig& cfg, std::size_t k = 100, int threads = 1) {
    if (split.valid.empty()) throw ValidationError("validate: empty validation split");
    auto by_id = doc_index_by_id(corpus.docs);
    std::vector<DocumentVector> queries, database;
    for (auto id : split.valid) queries.push_back(corpus.docs[by_id.at(id)]);
    for (auto id : split.train) database.push_back(corpus.docs[by_id.at(id)]);
    for (const auto& d : queries)
        if (d.label < 0) throw ValidationError("validate: unlabeled validation document");
    for (const auto& d : database)
        if (d.label < 0) throw ValidationError("validate: unlabeled training document");
    return precision_at_k(params, queries, database, cfg, k, threads);
}

inline TrainState init_train_state(const Corpus& corpus, const TrainConfig& cfg) {
    cfg.validate();
    TrainState state;
    Rng init_rng(Rng::combine(cfg.seed, 0x1417ULL));
    state.params.init(cfg, static_cast<int>(corpus.vocab.size()),
                      cfg.supervised ? corpus.num_classes() : 0, init_rng);
    auto blocks = state.params.param_blocks();
    state.adam.init(blocks);
    return state;
}

// Runs epochs [state.next_epoch, cfg.max_epochs) with early stopping. Appends
// one metrics line per epoch to `log` when given. Returns the report for the
// epochs it ran; on divergence the state keeps the last epoch-boundary params.
inline TrainReport train_loop(TrainState& state, const Corpus& corpus, const CorpusSplit& split,
                              const TrainConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    if (split.train.empty()) throw TrainingError("train: empty training split");
    auto start = std::chrono::steady_clock::now();

    auto by_id = doc_index_by_id(corpus.docs);
    std::vector<std::size_t> train_docs;
    train_docs.reserve(split.train.size());
    for (auto id : split.train) train_docs.push_back(by_id.at(id));

    bool can_validate = !split.valid.empty() && corpus.labeled();
    TrainReport report;
    NashParams last_good = state.params;

    for (int epoch = state.next_epoch; epoch < cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order = train_docs;
        Rng shuffle_rng(Rng::combine(cfg.seed, 0x5105ULL + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        Rng model_rng(Rng::combine(cfg.seed, 0xA11CULL + static_cast<std::uint64_t>(epoch)));

        double sum_recon = 0.0, sum_kl = 0.0, sum_dis = 0.0;
        double sum_rate = 0.0, sum_rate_sampled = 0.0, sum_dist = 0.0, max_rate = 0.0;
        double last_lr = lr_at(cfg, state.iter);
        auto blocks = state.params.param_blocks();

        try {
            for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
                std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
                state.params.zero_grads();
                for (std::size_t i = at; i < end; ++i) {
                    const auto& doc = corpus.docs[order[i]];
                    LossReport lr_doc =
                        loss_and_grads(state.params, doc, cfg, &model_rng, true);
                    sum_recon += lr_doc.recon;
                    sum_kl += lr_doc.kl;
                    sum_dis += lr_doc.dis;
                    sum_rate += lr_doc.rate_map;
                    sum_rate_sampled += lr_doc.rate_sampled;
                    sum_dist += lr_doc.distortion;
                    max_rate = std::max(max_rate, lr_doc.rate_map);
                }
                last_lr = lr_at(cfg, state.iter);
                state.adam.update(blocks, last_lr, 1.0 / static_cast<double>(end - at));
                ++state.iter;
            }
        } catch (const Error& e) {
            // Divergence: restore the last epoch-boundary params and stop.
            state.params = last_good;
            report.diverged = true;
            if (log) *log << "# training aborted at epoch " << epoch << ": " << e.what() << '\n';
            break;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.iter = state.iter;
        auto n = static_cast<double>(order.size());
        m.loss_recon = sum_recon / n;
        m.loss_kl = sum_kl / n;
        m.loss_dis = sum_dis / n;
        m.lr = last_lr;
        m.rate = sum_rate / n;
        m.rate_sampled = sum_rate_sampled / n;
        m.rate_max = max_rate;
        m.distortion = sum_dist / n;

        if (can_validate) {
            m.val_precision =
                validate(state.params, corpus, split, cfg, static_cast<std::size_t>(cfg.val_k));
            if (m.val_precision > state.best_val) {
                state.best_val = m.val_precision;
                state.best_epoch = epoch;
                state.best_params = state.params;
                state.has_best = true;
                state.stale_validations = 0;
            } else {
                ++state.stale_validations;
            }
        }

        report.epochs.push_back(m);
        if (log) *log << m.to_line() << '\n';
        last_good = state.params;
        state.next_epoch = epoch + 1;

        if (can_validate && state.stale_validations >= cfg.patience) break;
    }

    report.best_epoch = state.best_epoch;
    report.best_val = state.best_val;
    report.no_validation = !can_validate;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// Trains from scratch and returns the selected model: the best-validation
// checkpoint, or the final-epoch model (flagged) when validation is
// unavailable.
inline std::pair<NashParams, TrainReport> train(const Corpus& corpus, const CorpusSplit& split,
                                                const TrainConfig& cfg,
                                                std::ostream* log = nullptr) {
    TrainState state = init_train_state(corpus, cfg);
    TrainReport report = train_loop(state, corpus, split, cfg, log);
    if (report.no_validation && log)
        *log << "# no usable validation split; returning final-epoch model\n";
    NashParams selected = state.has_best ? state.best_params : state.params;
    return {std::move(selected), std::move(report)};
}

// ---------------------------------------------------------------------------
// Optimizer-state persistence (for exact resume).
// ---------------------------------------------------------------------------

inline void save_train_state(const std::string& path, const TrainState& state,
                             const TrainConfig& cfg) {
    auto arrays = detail::params_arrays(state.params);
    // params_arrays and param_blocks enumerate layers in the same order, so
    // the array names align with the Adam moment slots.
    const std::size_t n_blocks = arrays.size();
    for (std::size_t k = 0; k < n_blocks; ++k) {
        arrays.push_back({"adam.m." + arrays[k].name, {state.adam.m[k].size()}, state.adam.m[k]});
        arrays.push_back({"adam.v." + arrays[k].name, {state.adam.v[k].size()}, state.adam.v[k]});
    }
    if (state.has_best) {
        auto best = detail::params_arrays(state.best_params, "best.");
        arrays.insert(arrays.end(), best.begin(), best.end());
    }
    std::string meta = "vocab_size=" + std::to_string(state.params.vocab_size) +
                       "\nnum_classes=" + std::to_string(state.params.num_classes) +
                       "\nadam_step=" + std::to_string(state.adam.step) +
                       "\nnext_epoch=" + std::to_string(state.next_epoch) +
                       "\niter=" + std::to_string(state.iter) +
                       "\nbest_epoch=" + std::to_string(state.best_epoch) +
                       "\nhas_best=" + std::to_string(state.has_best ? 1 : 0) +
                       "\nstale_validations=" + std::to_string(state.stale_validations) + "\n";
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "best_val=%.17g\n", state.best_val);
        meta += buf;
    }
    container::write(path, cfg.serialize(), meta, arrays);
}

inline std::pair<TrainState, TrainConfig> load_train_state(const std::string& path) {
    auto contents = container::read(path);
    TrainConfig cfg = TrainConfig::parse(contents.config_text);
    auto meta = detail::parse_meta(contents.meta_text);
    int vocab_size = std::stoi(meta.at("vocab_size"));
    int num_classes = std::stoi(meta.at("num_classes"));

    TrainState state;
    Rng scratch(0);
    state.params.init(cfg, vocab_size, cfg.supervised ? num_classes : 0, scratch);
    std::map<std::string, const container::NamedArray*> by_name;
    for (const auto& a : contents.arrays) by_name[a.name] = &a;
    detail::fill_params(state.params, by_name);

    state.has_best = meta.at("has_best") == "1";
    if (state.has_best) {
        state.best_params.init(cfg, vocab_size, cfg.supervised ? num_classes : 0, scratch);
        detail::fill_params(state.best_params, by_name, "best.");
    }
    auto blocks = state.params.param_blocks();
    state.adam.init(blocks);
    state.adam.step = std::stoll(meta.at("adam_step"));
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        auto mi = by_name.find("adam.m." + blocks[k].name);
        auto vi = by_name.find("adam.v." + blocks[k].name);
        if (mi == by_name.end() || vi == by_name.end())
            throw IoError("train state missing Adam moments for " + blocks[k].name);
        state.adam.m[k] = mi->second->data;
        state.adam.v[k] = vi->second->data;
    }
    state.next_epoch = std::stoi(meta.at("next_epoch"));
    state.iter = std::stoll(meta.at("iter"));
    state.best_epoch = std::stoi(meta.at("best_epoch"));
    state.best_val = std::stod(meta.at("best_val"));
    state.stale_validations = std::stoi(meta.at("stale_validations"));
    return {std::move(state), cfg};
}

}  // namespace nash
