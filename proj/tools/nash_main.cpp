// Command-line front end for the semantic hashing pipeline.
//
// Subcommands: build, train, encode, eval, ablate, words, dump-codes,
// rd-curve. A flat key=value config file provides defaults; flags override.
// Exit codes: 0 success, 2 input error, 3 training failure, 4 artifact
// mismatch.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nash/nash.hpp"

namespace fs = std::filesystem;
using namespace nash;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitTraining = 3;
constexpr int kExitMismatch = 4;

struct MismatchError : Error {
    using Error::Error;
};

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
};

TrainConfig resolve_config(const GlobalOpts& opts) {
    TrainConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw IoError("cannot open config file: " + opts.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = TrainConfig::parse(ss.str());
    }
    if (opts.seed_set) cfg.seed = opts.seed;
    return cfg;
}

std::vector<int> parse_bits_list(const std::string& s) {
    std::vector<int> bits;
    for (const auto& part : split(s, ','))
        if (!trim(part).empty()) bits.push_back(std::stoi(trim(part)));
    if (bits.empty()) throw ConfigError("empty --bits list");
    return bits;
}

std::vector<DocumentVector> docs_for_split(const Corpus& corpus, const CorpusSplit& split,
                                           const std::string& which) {
    auto by_id = doc_index_by_id(corpus.docs);
    std::vector<DocumentVector> out;
    auto take = [&](const std::vector<std::int32_t>& ids) {
        for (auto id : ids) out.push_back(corpus.docs[by_id.at(id)]);
    };
    if (which == "train") take(split.train);
    else if (which == "valid") take(split.valid);
    else if (which == "test") take(split.test);
    else if (which == "all") {
        out = corpus.docs;
    } else {
        throw ConfigError("unknown split name: " + which);
    }
    if (out.empty()) throw CorpusError("split '" + which + "' is empty");
    return out;
}

void check_checkpoint_matches(const NashParams& params, const Corpus& corpus,
                              const TrainConfig& cli_cfg, bool bits_set) {
    if (params.vocab_size != static_cast<int>(corpus.vocab.size()))
        throw MismatchError("checkpoint vocabulary size " + std::to_string(params.vocab_size) +
                            " does not match corpus vocabulary size " +
                            std::to_string(corpus.vocab.size()));
    if (bits_set && cli_cfg.bits != params.bits)
        throw MismatchError("requested " + std::to_string(cli_cfg.bits) +
                            " bits but checkpoint has " + std::to_string(params.bits));
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

struct BuildArgs {
    std::string input;
    std::string features, labels, counts, vocab;
    std::size_t max_vocab = 10000;
    std::int64_t min_df = 1;
    std::vector<double> ratios = {0.8, 0.1, 0.1};
};

int cmd_build(const GlobalOpts& opts, const BuildArgs& args) {
    TrainConfig cfg = resolve_config(opts);
    cfg.validate();

    RunManifest manifest;
    manifest.command = "build";
    manifest.seed = cfg.seed;
    manifest.config = cfg;
    if (!args.input.empty()) manifest.add_input(args.input);
    if (!args.features.empty()) manifest.add_input(args.features);
    if (!args.labels.empty()) manifest.add_input(args.labels);
    if (!args.counts.empty()) manifest.add_input(args.counts);

    Corpus corpus;
    if (!args.input.empty()) {
        corpus = build_corpus_from_raw(args.input, args.max_vocab, args.min_df, &std::cerr);
    } else if (!args.features.empty()) {
        corpus = build_corpus_from_triplets(args.features, args.labels, args.counts, args.vocab);
    } else {
        throw ConfigError("build requires --input or --features");
    }
    if (args.ratios.size() != 3) throw ConfigError("--ratios needs three values");
    CorpusSplit split = split_corpus(
        corpus.docs, {args.ratios[0], args.ratios[1], args.ratios[2]}, cfg.seed);

    CorpusPaths paths(opts.out_dir);
    fs::create_directories(paths.dir);
    manifest.add_artifact("vocab", paths.vocab());
    manifest.add_artifact("features", paths.features());
    manifest.add_artifact("counts", paths.counts());
    manifest.add_artifact("labels", paths.labels());
    manifest.add_artifact("split", paths.split());
    manifest.write(paths.manifest());

    save_corpus_artifacts(opts.out_dir, corpus, split);
    std::cout << "built corpus: " << corpus.docs.size() << " documents, |V|="
              << corpus.vocab.size() << ", splits " << split.train.size() << "/"
              << split.valid.size() << "/" << split.test.size() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int train_one(const TrainConfig& cfg, const Corpus& corpus, const CorpusSplit& split,
              const std::string& run_dir, const std::string& corpus_dir) {
    fs::create_directories(run_dir);
    RunManifest manifest;
    manifest.command = "train";
    manifest.seed = cfg.seed;
    manifest.config = cfg;
    CorpusPaths cp(corpus_dir);
    manifest.add_input(cp.vocab());
    manifest.add_input(cp.features());
    manifest.add_input(cp.counts());
    manifest.add_input(cp.split());
    std::string ckpt_path = (fs::path(run_dir) / "model.ckpt").string();
    std::string log_path = (fs::path(run_dir) / "metrics.log").string();
    manifest.add_artifact("checkpoint", ckpt_path);
    manifest.add_artifact("metrics", log_path);
    manifest.write((fs::path(run_dir) / "manifest.txt").string());

    std::ofstream log(log_path);
    if (!log) throw IoError("cannot write metrics log: " + log_path);
    auto [params, report] = train(corpus, split, cfg, &log);
    save_checkpoint(ckpt_path, params, cfg);

    if (report.diverged) {
        std::cerr << "training diverged; last good checkpoint kept at " << ckpt_path << "\n";
        return kExitTraining;
    }
    std::cout << "trained " << cfg.bits << "-bit model: best val precision@" << cfg.val_k << " = ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", report.best_val < 0 ? 0.0 : report.best_val);
    std::cout << buf << " (epoch " << report.best_epoch << "), checkpoint " << ckpt_path << "\n";
    return kExitOk;
}

int cmd_train(const GlobalOpts& opts, const TrainConfig& cfg, const std::string& corpus_dir,
              const std::string& bits_list) {
    auto [corpus, split] = load_corpus_artifacts(corpus_dir);
    std::vector<int> bits = bits_list.empty() ? std::vector<int>{cfg.bits}
                                              : parse_bits_list(bits_list);
    int rc = kExitOk;
    for (int l : bits) {
        TrainConfig run_cfg = cfg;
        run_cfg.bits = l;
        run_cfg.validate();
        std::string run_dir = bits.size() == 1
                                  ? opts.out_dir
                                  : (fs::path(opts.out_dir) / ("bits" + std::to_string(l))).string();
        int one = train_one(run_cfg, corpus, split, run_dir, corpus_dir);
        rc = std::max(rc, one);
    }
    return rc;
}

// ---------------------------------------------------------------------------
// encode / dump-codes
// ---------------------------------------------------------------------------

int cmd_encode(const GlobalOpts& opts, const std::string& ckpt_path,
               const std::string& corpus_dir, const std::string& which,
               const std::string& out_path, bool with_label) {
    auto [params, cfg] = load_checkpoint(ckpt_path);
    auto [corpus, split] = load_corpus_artifacts(corpus_dir);
    check_checkpoint_matches(params, corpus, cfg, false);
    auto docs = docs_for_split(corpus, split, which);

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write code dump: " + out_path);
    dump_codes(params, docs, cfg, out, with_label);
    std::cout << "wrote " << docs.size() << " codes to " << out_path << "\n";
    (void)opts;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const GlobalOpts& opts, const std::string& ckpt_path, const std::string& corpus_dir,
             std::size_t k, const std::string& query_split, const std::string& db_split,
             const std::string& out_path, const std::string& results_path) {
    auto [params, cfg] = load_checkpoint(ckpt_path);
    auto [corpus, split] = load_corpus_artifacts(corpus_dir);
    check_checkpoint_matches(params, corpus, cfg, false);
    auto queries = docs_for_split(corpus, split, query_split);
    auto database = docs_for_split(corpus, split, db_split);

    CodeIndex db_index = build_index(params, database, cfg);
    CodeIndex q_index = build_index(params, queries, cfg);
    double precision = precision_at_k(db_index, q_index, k, opts.threads);

    char line[64];
    std::snprintf(line, sizeof(line), "precision_at_%zu=%.4f", k, precision);
    std::cout << line << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write summary: " + out_path);
        out << line << "\n";
    }
    if (!results_path.empty()) {
        std::ofstream out(results_path);
        if (!out) throw IoError("cannot write results: " + results_path);
        std::vector<RetrievalResult> results;
        results.reserve(q_index.size());
        for (std::size_t q = 0; q < q_index.size(); ++q)
            results.push_back(hamming_topk(db_index, q_index.codes[q], k, q_index.doc_ids[q]));
        write_results(results, out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// ablate: one axis varied at a time, everything else at the base config.
// ---------------------------------------------------------------------------

int cmd_ablate(const GlobalOpts& opts, const TrainConfig& base_cfg, const std::string& corpus_dir,
               const std::string& axes_csv, std::size_t k) {
    auto [corpus, corpus_split] = load_corpus_artifacts(corpus_dir);
    auto axes = split(axes_csv, ',');

    struct Row {
        std::string axis, value;
        double precision;
    };
    std::vector<Row> rows;

    auto run_variant = [&](const std::string& axis, const std::string& value, TrainConfig cfg) {
        cfg.validate();
        std::string run_dir =
            (fs::path(opts.out_dir) / ("ablate_" + axis + "_" + value)).string();
        fs::create_directories(run_dir);
        std::ofstream log((fs::path(run_dir) / "metrics.log").string());
        auto [params, report] = train(corpus, corpus_split, cfg, &log);
        save_checkpoint((fs::path(run_dir) / "model.ckpt").string(), params, cfg);
        auto queries = docs_for_split(corpus, corpus_split, "test");
        auto database = docs_for_split(corpus, corpus_split, "train");
        double precision = precision_at_k(params, queries, database, cfg, k, opts.threads);
        rows.push_back({axis, value, precision});
        std::cout << "ablate " << axis << "=" << value << " precision_at_" << k << "=";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", precision);
        std::cout << buf << "\n";
    };

    for (const auto& axis_raw : axes) {
        std::string axis = trim(axis_raw);
        if (axis == "binarization") {
            for (const char* v : {"deterministic", "stochastic"}) {
                TrainConfig cfg = base_cfg;
                cfg.binarization = parse_binarization(v);
                run_variant(axis, v, cfg);
            }
        } else if (axis == "noise") {
            for (const char* v : {"none", "fixed", "data"}) {
                TrainConfig cfg = base_cfg;
                cfg.noise = parse_noise_mode(v);
                run_variant(axis, v, cfg);
            }
        } else if (axis == "encoder") {
            for (int depth : {0, 1, 2}) {
                TrainConfig cfg = base_cfg;
                cfg.encoder_layers = depth;
                run_variant(axis, std::to_string(depth), cfg);
            }
        } else if (axis == "decoder") {
            for (int depth : {0, 1, 2}) {
                TrainConfig cfg = base_cfg;
                cfg.decoder_layers = depth;
                run_variant(axis, std::to_string(depth), cfg);
            }
        } else {
            throw ConfigError("unknown ablation axis: " + axis);
        }
    }

    std::string table_path = (fs::path(opts.out_dir) / "ablate.txt").string();
    std::ofstream table(table_path);
    if (!table) throw IoError("cannot write ablation table: " + table_path);
    table << "axis\tvalue\tprecision_at_" << k << "\n";
    for (const auto& r : rows) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", r.precision);
        table << r.axis << '\t' << r.value << '\t' << buf << '\n';
    }
    std::cout << "wrote " << table_path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// words / rd-curve
// ---------------------------------------------------------------------------

int cmd_words(const std::string& ckpt_path, const std::string& corpus_dir,
              const std::string& probe, std::size_t n, const std::string& metric) {
    auto [params, cfg] = load_checkpoint(ckpt_path);
    Corpus corpus;
    CorpusPaths paths(corpus_dir);
    corpus.vocab = load_vocabulary(paths.vocab());
    WordMetric m = metric == "euclidean" ? WordMetric::euclidean : WordMetric::cosine;
    if (metric != "euclidean" && metric != "cosine")
        throw ConfigError("unknown metric: " + metric);
    auto hood = nearest_words(params, corpus.vocab, probe, n, m);
    std::cout << hood.probe << ":";
    for (const auto& [term, dist] : hood.neighbors) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", dist);
        std::cout << " " << term << "(" << buf << ")";
    }
    std::cout << "\n";
    return kExitOk;
}

int cmd_rd_curve(const std::string& log_path, const std::string& out_path) {
    std::ifstream in(log_path);
    if (!in) throw IoError("cannot open metrics log: " + log_path);
    auto curve = rate_distortion_curve(in);
    if (out_path.empty()) {
        write_curve_csv(curve, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write curve: " + out_path);
        write_curve_csv(curve, out);
        std::cout << "wrote " << out_path << " (" << curve.size() << " rows)\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"End-to-end semantic hashing with Bernoulli latent codes"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "Flat key=value config file")
        ->envname("NASH_CONFIG");
    app.add_option("--out-dir", opts.out_dir, "Output directory (default: .)");
    auto* seed_opt = app.add_option("--seed", opts.seed, "Run seed (overrides config)");
    app.add_option("--threads", opts.threads, "Retrieval fan-out threads (default 1)");

    // build
    BuildArgs build_args;
    std::string ratios_csv = "0.8,0.1,0.1";
    auto* build = app.add_subcommand("build", "Build corpus artifacts from raw text or triplets");
    build->add_option("--input", build_args.input, "Raw corpus: one `<label>\\t<text>` per line");
    build->add_option("--features", build_args.features, "Precomputed sparse-triplet features");
    build->add_option("--labels", build_args.labels, "Sidecar labels `<doc_id> <label_id>`");
    build->add_option("--counts", build_args.counts, "Sidecar occurrence-count triplets");
    build->add_option("--vocab", build_args.vocab, "Vocabulary file for triplet input");
    build->add_option("--max-vocab", build_args.max_vocab, "Vocabulary size cap (default 10000)");
    build->add_option("--min-df", build_args.min_df, "Minimum document frequency (default 1)");
    build->add_option("--ratios", ratios_csv, "train,valid,test ratios (default 0.8,0.1,0.1)");

    // train
    auto* tr = app.add_subcommand("train", "Train a hashing model on built corpus artifacts");
    std::string tr_corpus, tr_bits;
    std::string tr_binarization, tr_noise;
    TrainConfig flag_cfg;  // flag values land here, then override the file config
    tr->add_option("--corpus", tr_corpus, "Corpus artifact directory")->required();
    tr->add_option("--bits", tr_bits, "Code length, or comma list for a sweep (e.g. 8,16,32)");
    tr->add_option("--binarization", tr_binarization, "deterministic|stochastic|identity");
    tr->add_option("--noise", tr_noise, "none|fixed|data");
    auto* o_sigma = tr->add_option("--sigma", flag_cfg.fixed_sigma, "Fixed noise sigma");
    auto* o_gamma = tr->add_option("--gamma", flag_cfg.prior_gamma, "Bernoulli prior per bit");
    auto* o_sup = tr->add_flag("--supervised", "Train the classifier head jointly");
    auto* o_alpha = tr->add_option("--alpha", flag_cfg.alpha, "Discriminative loss weight");
    auto* o_enc = tr->add_option("--encoder-layers", flag_cfg.encoder_layers, "0, 1 or 2");
    auto* o_dec = tr->add_option("--decoder-layers", flag_cfg.decoder_layers, "0, 1 or 2");
    auto* o_hidden = tr->add_option("--hidden", flag_cfg.hidden_units, "Hidden units per layer");
    auto* o_lr = tr->add_option("--lr", flag_cfg.learning_rate, "Base learning rate");
    auto* o_keep = tr->add_option("--dropout-keep", flag_cfg.dropout_keep, "Keep probability");
    auto* o_batch = tr->add_option("--batch-size", flag_cfg.batch_size, "Mini-batch size");
    auto* o_epochs = tr->add_option("--epochs", flag_cfg.max_epochs, "Maximum epochs");
    auto* o_patience = tr->add_option("--patience", flag_cfg.patience, "Early-stop patience");
    auto* o_valk = tr->add_option("--val-k", flag_cfg.val_k, "Validation precision@k");

    // encode / dump-codes
    auto* enc = app.add_subcommand("encode", "Write `<doc_id>\\t<bitstring>` codes");
    std::string enc_ckpt, enc_corpus, enc_split = "all", enc_out = "codes.txt";
    enc->add_option("--checkpoint", enc_ckpt, "Trained checkpoint")->required();
    enc->add_option("--corpus", enc_corpus, "Corpus artifact directory")->required();
    enc->add_option("--split", enc_split, "train|valid|test|all (default all)");
    enc->add_option("--out", enc_out, "Output file");

    auto* dump = app.add_subcommand("dump-codes", "Write `<doc_id>\\t<label>\\t<bitstring>` codes");
    std::string dump_ckpt, dump_corpus, dump_split = "all", dump_out = "code_dump.txt";
    dump->add_option("--checkpoint", dump_ckpt, "Trained checkpoint")->required();
    dump->add_option("--corpus", dump_corpus, "Corpus artifact directory")->required();
    dump->add_option("--split", dump_split, "train|valid|test|all (default all)");
    dump->add_option("--out", dump_out, "Output file");

    // eval
    auto* ev = app.add_subcommand("eval", "Precision@K of query codes against a database split");
    std::string ev_ckpt, ev_corpus, ev_queries = "test", ev_db = "train", ev_out, ev_results;
    std::size_t ev_k = 100;
    ev->add_option("--checkpoint", ev_ckpt, "Trained checkpoint")->required();
    ev->add_option("--corpus", ev_corpus, "Corpus artifact directory")->required();
    ev->add_option("--k", ev_k, "Neighbors per query (default 100)");
    ev->add_option("--queries", ev_queries, "Query split (default test)");
    ev->add_option("--database", ev_db, "Database split (default train)");
    ev->add_option("--out", ev_out, "Summary file (key=value)");
    ev->add_option("--results", ev_results, "Per-query results file");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Sweep one axis at a time and tabulate precision");
    std::string ab_corpus, ab_axes = "binarization,noise,encoder,decoder";
    std::size_t ab_k = 100;
    ab->add_option("--corpus", ab_corpus, "Corpus artifact directory")->required();
    ab->add_option("--axes", ab_axes, "Comma list from {binarization,noise,encoder,decoder}");
    ab->add_option("--k", ab_k, "Precision@k for the table (default 100)");
    auto* ab_epochs = ab->add_option("--epochs", flag_cfg.max_epochs, "Maximum epochs per run");
    auto* ab_bits = ab->add_option("--bits", flag_cfg.bits, "Code length");

    // words
    auto* wd = app.add_subcommand("words", "Nearest words in the learned embedding space");
    std::string wd_ckpt, wd_corpus, wd_probe, wd_metric = "cosine";
    std::size_t wd_n = 5;
    wd->add_option("--checkpoint", wd_ckpt, "Trained checkpoint")->required();
    wd->add_option("--corpus", wd_corpus, "Corpus artifact directory")->required();
    wd->add_option("--probe", wd_probe, "Probe word")->required();
    wd->add_option("--n", wd_n, "Neighbors to list (default 5)");
    wd->add_option("--metric", wd_metric, "cosine|euclidean (default cosine)");

    // rd-curve
    auto* rd = app.add_subcommand("rd-curve", "Per-epoch rate/distortion table from a metrics log");
    std::string rd_log, rd_out;
    rd->add_option("--log", rd_log, "metrics.log from a training run")->required();
    rd->add_option("--out", rd_out, "CSV output (default: stdout)");

    // Global flags may appear after the subcommand name.
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    opts.seed_set = seed_opt->count() > 0;

    try {
        if (build->parsed()) {
            build_args.ratios.clear();
            for (const auto& part : split(ratios_csv, ','))
                build_args.ratios.push_back(std::stod(trim(part)));
            return cmd_build(opts, build_args);
        }
        if (tr->parsed() || ab->parsed()) {
            TrainConfig cfg = resolve_config(opts);
            if (!tr_binarization.empty()) cfg.binarization = parse_binarization(tr_binarization);
            if (!tr_noise.empty()) cfg.noise = parse_noise_mode(tr_noise);
            if (o_sigma->count()) cfg.fixed_sigma = flag_cfg.fixed_sigma;
            if (o_gamma->count()) cfg.prior_gamma = flag_cfg.prior_gamma;
            if (o_sup->count()) cfg.supervised = true;
            if (o_alpha->count()) cfg.alpha = flag_cfg.alpha;
            if (o_enc->count()) cfg.encoder_layers = flag_cfg.encoder_layers;
            if (o_dec->count()) cfg.decoder_layers = flag_cfg.decoder_layers;
            if (o_hidden->count()) cfg.hidden_units = flag_cfg.hidden_units;
            if (o_lr->count()) cfg.learning_rate = flag_cfg.learning_rate;
            if (o_keep->count()) cfg.dropout_keep = flag_cfg.dropout_keep;
            if (o_batch->count()) cfg.batch_size = flag_cfg.batch_size;
            if (o_epochs->count() || ab_epochs->count()) cfg.max_epochs = flag_cfg.max_epochs;
            if (o_patience->count()) cfg.patience = flag_cfg.patience;
            if (o_valk->count()) cfg.val_k = flag_cfg.val_k;
            if (ab_bits->count()) cfg.bits = flag_cfg.bits;
            if (tr->parsed()) return cmd_train(opts, cfg, tr_corpus, tr_bits);
            return cmd_ablate(opts, cfg, ab_corpus, ab_axes, ab_k);
        }
        if (enc->parsed()) return cmd_encode(opts, enc_ckpt, enc_corpus, enc_split, enc_out, false);
        if (dump->parsed())
            return cmd_encode(opts, dump_ckpt, dump_corpus, dump_split, dump_out, true);
        if (ev->parsed())
            return cmd_eval(opts, ev_ckpt, ev_corpus, ev_k, ev_queries, ev_db, ev_out, ev_results);
        if (wd->parsed()) return cmd_words(wd_ckpt, wd_corpus, wd_probe, wd_n, wd_metric);
        if (rd->parsed()) return cmd_rd_curve(rd_log, rd_out);
        std::cerr << "no subcommand given\n";
        return kExitInput;
    } catch (const MismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
