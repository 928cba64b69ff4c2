#pragma once

// Versioned binary container for parameter checkpoints: named f64 arrays with
// shapes plus the full TrainConfig echoed as text for provenance. Also used
// to persist optimizer state so training can resume bit-identically.
// Layout is little-endian; this targets LE hosts.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "nash/common.hpp"
#include "nash/config.hpp"
#include "nash/model.hpp"

namespace nash {

namespace container {

inline constexpr char kMagic[8] = {'N', 'A', 'S', 'H', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 0;

struct NamedArray {
    std::string name;
    std::vector<std::uint64_t> dims;
    Vec data;
};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("checkpoint: unexpected end of file");
    return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_pod(os, static_cast<std::uint64_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    auto n = read_pod<std::uint64_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw IoError("checkpoint: unexpected end of file");
    return s;
}

inline void write(const std::string& path, const std::string& config_text,
                  const std::string& meta_text, const std::vector<NamedArray>& arrays) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_string(out, config_text);
    write_string(out, meta_text);
    write_pod(out, static_cast<std::uint64_t>(arrays.size()));
    for (const auto& a : arrays) {
        write_string(out, a.name);
        write_pod(out, kDtypeF64);
        write_pod(out, static_cast<std::uint32_t>(a.dims.size()));
        for (auto d : a.dims) write_pod(out, d);
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

struct Contents {
    std::string config_text;
    std::string meta_text;
    std::vector<NamedArray> arrays;
};

inline Contents read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint file: " + path);
    auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    Contents c;
    c.config_text = read_string(in);
    c.meta_text = read_string(in);
    auto n = read_pod<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        NamedArray a;
        a.name = read_string(in);
        auto dtype = read_pod<std::uint8_t>(in);
        if (dtype != kDtypeF64) throw IoError("unsupported dtype in checkpoint");
        auto ndim = read_pod<std::uint32_t>(in);
        std::uint64_t total = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            a.dims.push_back(read_pod<std::uint64_t>(in));
            total *= a.dims.back();
        }
        a.data.resize(total);
        in.read(reinterpret_cast<char*>(a.data.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!in) throw IoError("checkpoint: truncated array data");
        c.arrays.push_back(std::move(a));
    }
    return c;
}

}  // namespace container

// ---------------------------------------------------------------------------
// Model checkpoints
// ---------------------------------------------------------------------------

namespace detail {

inline void append_layer(std::vector<container::NamedArray>& arrays, const std::string& name,
                         const DenseLayer& layer) {
    arrays.push_back({name + ".weight", {layer.weight.rows, layer.weight.cols},
                      layer.weight.data});
    arrays.push_back({name + ".bias", {layer.bias.size()}, layer.bias});
}

inline std::vector<container::NamedArray> params_arrays(const NashParams& params,
                                                        const std::string& prefix = "") {
    std::vector<container::NamedArray> arrays;
    for (std::size_t i = 0; i < params.encoder_hidden.size(); ++i)
        append_layer(arrays, prefix + "encoder.h" + std::to_string(i), params.encoder_hidden[i]);
    append_layer(arrays, prefix + "encoder.logits", params.encoder_logits);
    append_layer(arrays, prefix + "noise", params.noise_head);
    for (std::size_t i = 0; i < params.decoder_hidden.size(); ++i)
        append_layer(arrays, prefix + "decoder.h" + std::to_string(i), params.decoder_hidden[i]);
    append_layer(arrays, prefix + "decoder.out", params.decoder_out);
    if (params.supervised) {
        for (std::size_t i = 0; i < params.classifier_hidden.size(); ++i)
            append_layer(arrays, prefix + "classifier.h" + std::to_string(i),
                         params.classifier_hidden[i]);
        append_layer(arrays, prefix + "classifier.out", params.classifier_out);
    }
    return arrays;
}

inline void fill_params(NashParams& params, const std::map<std::string, const container::NamedArray*>& by_name,
                        const std::string& prefix = "") {
    auto load_layer = [&by_name, &prefix](const std::string& name, DenseLayer& layer) {
        auto wi = by_name.find(prefix + name + ".weight");
        auto bi = by_name.find(prefix + name + ".bias");
        if (wi == by_name.end() || bi == by_name.end())
            throw IoError("checkpoint missing arrays for layer " + name);
        const auto& w = *wi->second;
        const auto& b = *bi->second;
        if (w.dims.size() != 2 || w.dims[0] != layer.weight.rows || w.dims[1] != layer.weight.cols ||
            b.data.size() != layer.bias.size())
            throw IoError("checkpoint shape mismatch for layer " + name);
        layer.weight.data = w.data;
        layer.bias = b.data;
    };
    for (std::size_t i = 0; i < params.encoder_hidden.size(); ++i)
        load_layer("encoder.h" + std::to_string(i), params.encoder_hidden[i]);
    load_layer("encoder.logits", params.encoder_logits);
    load_layer("noise", params.noise_head);
    for (std::size_t i = 0; i < params.decoder_hidden.size(); ++i)
        load_layer("decoder.h" + std::to_string(i), params.decoder_hidden[i]);
    load_layer("decoder.out", params.decoder_out);
    if (params.supervised) {
        for (std::size_t i = 0; i < params.classifier_hidden.size(); ++i)
            load_layer("classifier.h" + std::to_string(i), params.classifier_hidden[i]);
        load_layer("classifier.out", params.classifier_out);
    }
}

inline std::map<std::string, std::string> parse_meta(const std::string& text) {
    std::map<std::string, std::string> kv;
    for (const auto& line : split(text, '\n')) {
        auto t = trim(line);
        if (t.empty()) continue;
        auto pos = t.find('=');
        if (pos == std::string::npos) continue;
        kv[t.substr(0, pos)] = t.substr(pos + 1);
    }
    return kv;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const NashParams& params,
                            const TrainConfig& cfg) {
    std::string meta = "vocab_size=" + std::to_string(params.vocab_size) +
                       "\nnum_classes=" + std::to_string(params.num_classes) + "\n";
    container::write(path, cfg.serialize(), meta, detail::params_arrays(params));
}

inline std::pair<NashParams, TrainConfig> load_checkpoint(const std::string& path) {
    auto contents = container::read(path);
    TrainConfig cfg = TrainConfig::parse(contents.config_text);
    auto meta = detail::parse_meta(contents.meta_text);
    if (!meta.count("vocab_size")) throw IoError("checkpoint missing vocab_size");
    int vocab_size = std::stoi(meta.at("vocab_size"));
    int num_classes = meta.count("num_classes") ? std::stoi(meta.at("num_classes")) : 0;

    NashParams params;
    Rng scratch(0);
    params.init(cfg, vocab_size, cfg.supervised ? num_classes : 0, scratch);
    std::map<std::string, const container::NamedArray*> by_name;
    for (const auto& a : contents.arrays) by_name[a.name] = &a;
    detail::fill_params(params, by_name);
    return {std::move(params), cfg};
}

}  // namespace nash
