#pragma once

// TrainConfig: every hyperparameter and mode flag, with flat key=value
// (de)serialization. The serialized form is echoed verbatim into checkpoints
// and run manifests.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "nash/common.hpp"

namespace nash {

enum class Binarization {
    deterministic,  // bit = h > 0.5
    stochastic,     // bit = h > Uniform(0,1)
    identity,       // no binarization; h flows straight through (diagnostics)
};

enum class NoiseMode {
    none,
    fixed,           // z' = z + sigma * eps with constant sigma
    data_dependent,  // log sigma^2 predicted per document from encoder logits
};

inline std::string to_string(Binarization b) {
    switch (b) {
        case Binarization::deterministic: return "deterministic";
        case Binarization::stochastic: return "stochastic";
        case Binarization::identity: return "identity";
    }
    return "?";
}

inline std::string to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::none: return "none";
        case NoiseMode::fixed: return "fixed";
        case NoiseMode::data_dependent: return "data";
    }
    return "?";
}

inline Binarization parse_binarization(const std::string& s) {
    if (s == "deterministic") return Binarization::deterministic;
    if (s == "stochastic") return Binarization::stochastic;
    if (s == "identity") return Binarization::identity;
    throw ConfigError("unknown binarization mode: " + s);
}

inline NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "none") return NoiseMode::none;
    if (s == "fixed") return NoiseMode::fixed;
    if (s == "data") return NoiseMode::data_dependent;
    throw ConfigError("unknown noise mode: " + s);
}

struct TrainConfig {
    int bits = 16;  // code length l, one of {8,16,32,64,128}
    Binarization binarization = Binarization::stochastic;
    NoiseMode noise = NoiseMode::none;
    double fixed_sigma = 0.3;  // sigma for NoiseMode::fixed
    double prior_gamma = 0.5;  // Bernoulli prior per bit
    bool supervised = false;
    double alpha = 0.1;  // weight of the discriminative loss

    int encoder_layers = 2;  // hidden layers in the encoder, 0..2
    int decoder_layers = 0;  // hidden layers before the softmax output, 0..2
    int hidden_units = 500;
    int classifier_hidden_units = 500;

    double learning_rate = 1e-3;
    double lr_decay = 0.96;
    int lr_decay_every = 10000;  // iterations
    double dropout_keep = 0.8;   // keep probability on the encoder output
    int batch_size = 100;
    int max_epochs = 100;
    int patience = 10;  // validations without improvement before stopping
    int val_k = 100;    // precision@k used for model selection
    std::uint64_t seed = 1;

    void validate() const {
        if (bits != 8 && bits != 16 && bits != 32 && bits != 64 && bits != 128)
            throw ConfigError("bits must be one of {8,16,32,64,128}");
        if (prior_gamma <= 0.0 || prior_gamma >= 1.0)
            throw ConfigError("prior_gamma must lie strictly inside (0, 1)");
        if (dropout_keep <= 0.0 || dropout_keep > 1.0)
            throw ConfigError("dropout_keep must lie in (0, 1]");
        if (fixed_sigma < 0.0) throw ConfigError("fixed_sigma must be >= 0");
        if (encoder_layers < 0 || encoder_layers > 2)
            throw ConfigError("encoder_layers must be 0, 1 or 2");
        if (decoder_layers < 0 || decoder_layers > 2)
            throw ConfigError("decoder_layers must be 0, 1 or 2");
        if (hidden_units < 1 || classifier_hidden_units < 1)
            throw ConfigError("hidden unit counts must be positive");
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
        if (lr_decay <= 0.0 || lr_decay > 1.0) throw ConfigError("lr_decay must lie in (0, 1]");
        if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be positive");
        if (batch_size < 1) throw ConfigError("batch_size must be positive");
        if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
        if (patience < 1) throw ConfigError("patience must be positive");
        if (val_k < 1) throw ConfigError("val_k must be positive");
        if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    }

    // Key order is fixed so serialized configs are byte-stable.
    std::string serialize() const {
        std::ostringstream os;
        os.precision(17);
        os << "bits=" << bits << '\n'
           << "binarization=" << to_string(binarization) << '\n'
           << "noise=" << to_string(noise) << '\n'
           << "fixed_sigma=" << fixed_sigma << '\n'
           << "prior_gamma=" << prior_gamma << '\n'
           << "supervised=" << (supervised ? 1 : 0) << '\n'
           << "alpha=" << alpha << '\n'
           << "encoder_layers=" << encoder_layers << '\n'
           << "decoder_layers=" << decoder_layers << '\n'
           << "hidden_units=" << hidden_units << '\n'
           << "classifier_hidden_units=" << classifier_hidden_units << '\n'
           << "learning_rate=" << learning_rate << '\n'
           << "lr_decay=" << lr_decay << '\n'
           << "lr_decay_every=" << lr_decay_every << '\n'
           << "dropout_keep=" << dropout_keep << '\n'
           << "batch_size=" << batch_size << '\n'
           << "max_epochs=" << max_epochs << '\n'
           << "patience=" << patience << '\n'
           << "val_k=" << val_k << '\n'
           << "seed=" << seed << '\n';
        return os.str();
    }

    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "bits") bits = std::stoi(value);
            else if (key == "binarization") binarization = parse_binarization(value);
            else if (key == "noise") noise = parse_noise_mode(value);
            else if (key == "fixed_sigma") fixed_sigma = std::stod(value);
            else if (key == "prior_gamma") prior_gamma = std::stod(value);
            else if (key == "supervised") supervised = (value == "1" || value == "true");
            else if (key == "alpha") alpha = std::stod(value);
            else if (key == "encoder_layers") encoder_layers = std::stoi(value);
            else if (key == "decoder_layers") decoder_layers = std::stoi(value);
            else if (key == "hidden_units") hidden_units = std::stoi(value);
            else if (key == "classifier_hidden_units") classifier_hidden_units = std::stoi(value);
            else if (key == "learning_rate") learning_rate = std::stod(value);
            else if (key == "lr_decay") lr_decay = std::stod(value);
            else if (key == "lr_decay_every") lr_decay_every = std::stoi(value);
            else if (key == "dropout_keep") dropout_keep = std::stod(value);
            else if (key == "batch_size") batch_size = std::stoi(value);
            else if (key == "max_epochs") max_epochs = std::stoi(value);
            else if (key == "patience") patience = std::stoi(value);
            else if (key == "val_k") val_k = std::stoi(value);
            else if (key == "seed") seed = std::stoull(value);
            else throw ConfigError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for config key " + key + ": " + value);
        } catch (const std::out_of_range&) {
            throw ConfigError("out-of-range value for config key " + key + ": " + value);
        }
    }

    static TrainConfig parse(const std::string& text) {
        TrainConfig cfg;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            auto pos = t.find('=');
            if (pos == std::string::npos) throw ConfigError("malformed config line: " + t);
            cfg.set(trim(t.substr(0, pos)), trim(t.substr(pos + 1)));
        }
        return cfg;
    }
};

}  // namespace nash
