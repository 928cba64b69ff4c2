#pragma once

// The hashing model: encoder -> Bernoulli code (deterministic or stochastic),
// closed-form KL against the Bernoulli prior, optional Gaussian noise on the
// code (fixed or predicted per document), softmax reconstruction decoder over
// the vocabulary, optional classifier head, and loss/gradient assembly with
// the straight-through estimator.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nash/common.hpp"
#include "nash/config.hpp"
#include "nash/corpus.hpp"
#include "nash/hashcode.hpp"
#include "nash/nn.hpp"

namespace nash {

inline constexpr double kSigmaMin = 1e-4;
inline constexpr double kSigmaMax = 1e2;
inline constexpr double kProbEps = 1e-12;  // clamp for log(h), log(1-h)

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct NashParams {
    int vocab_size = 0;
    int bits = 0;
    int hidden = 0;
    int encoder_layers = 0;
    int decoder_layers = 0;
    bool supervised = false;
    int num_classes = 0;
    int cls_hidden_units = 0;

    std::vector<DenseLayer> encoder_hidden;    // encoder MLP stack
    DenseLayer encoder_logits;                 // -> bits (pre-sigmoid)
    DenseLayer noise_head;                     // bits -> bits, outputs log sigma^2
    std::vector<DenseLayer> decoder_hidden;    // optional nonlinearity before the softmax
    DenseLayer decoder_out;                    // vocab x dec_in; rows are word embeddings
    std::vector<DenseLayer> classifier_hidden; // two layers (supervised only)
    DenseLayer classifier_out;                 // num_classes x classifier_hidden

    int decoder_input_dim() const { return decoder_layers == 0 ? bits : hidden; }

    // Structural checks only; full config validation happens in the trainer.
    // Tests may build models below the standard {8,...,128} code lengths.
    void init(const TrainConfig& cfg, int vocab, int n_classes, Rng& rng) {
        NASH_REQUIRE(cfg.bits >= 1 && cfg.bits <= static_cast<int>(HashCode::max_bits),
                     "NashParams: bits out of range");
        NASH_REQUIRE(cfg.encoder_layers >= 0 && cfg.encoder_layers <= 2 &&
                         cfg.decoder_layers >= 0 && cfg.decoder_layers <= 2,
                     "NashParams: layer counts out of range");
        NASH_REQUIRE(vocab >= 1, "NashParams: empty vocabulary");
        vocab_size = vocab;
        bits = cfg.bits;
        hidden = cfg.hidden_units;
        encoder_layers = cfg.encoder_layers;
        decoder_layers = cfg.decoder_layers;
        supervised = cfg.supervised;
        num_classes = supervised ? n_classes : 0;
        cls_hidden_units = cfg.classifier_hidden_units;
        if (supervised && num_classes < 2)
            throw ConfigError("supervised mode requires at least 2 labeled classes");

        encoder_hidden.clear();
        int in_dim = vocab_size;
        for (int i = 0; i < encoder_layers; ++i) {
            encoder_hidden.emplace_back(static_cast<std::size_t>(hidden),
                                        static_cast<std::size_t>(in_dim));
            encoder_hidden.back().init(rng);
            in_dim = hidden;
        }
        encoder_logits = DenseLayer(static_cast<std::size_t>(bits), static_cast<std::size_t>(in_dim));
        encoder_logits.init(rng);

        // The noise head starts as a constant map at the fixed-noise operating
        // point: zero weights, bias = ln(sigma0^2). It then adapts per input.
        noise_head = DenseLayer(static_cast<std::size_t>(bits), static_cast<std::size_t>(bits));
        double sigma0 = std::max(cfg.fixed_sigma, kSigmaMin);
        std::fill(noise_head.bias.begin(), noise_head.bias.end(), 2.0 * std::log(sigma0));

        decoder_hidden.clear();
        in_dim = bits;
        for (int i = 0; i < decoder_layers; ++i) {
            decoder_hidden.emplace_back(static_cast<std::size_t>(hidden),
                                        static_cast<std::size_t>(in_dim));
            decoder_hidden.back().init(rng);
            in_dim = hidden;
        }
        decoder_out = DenseLayer(static_cast<std::size_t>(vocab_size),
                                 static_cast<std::size_t>(in_dim));
        decoder_out.init(rng);

        classifier_hidden.clear();
        if (supervised) {
            auto ch = static_cast<std::size_t>(cls_hidden_units);
            classifier_hidden.emplace_back(ch, static_cast<std::size_t>(bits));
            classifier_hidden.back().init(rng);
            classifier_hidden.emplace_back(ch, ch);
            classifier_hidden.back().init(rng);
            classifier_out = DenseLayer(static_cast<std::size_t>(num_classes), ch);
            classifier_out.init(rng);
        } else {
            classifier_out = DenseLayer();
        }
    }

    // Stable enumeration of all parameter arrays; Adam state and checkpoints
    // key off these names.
    std::vector<ParamBlock> param_blocks() {
        std::vector<ParamBlock> blocks;
        auto add = [&blocks](const std::string& name, DenseLayer& layer) {
            blocks.push_back({name + ".weight", layer.weight.data.data(),
                              layer.grad_weight.data.data(), layer.weight.data.size()});
            blocks.push_back({name + ".bias", layer.bias.data(), layer.grad_bias.data(),
                              layer.bias.size()});
        };
        for (std::size_t i = 0; i < encoder_hidden.size(); ++i)
            add("encoder.h" + std::to_string(i), encoder_hidden[i]);
        add("encoder.logits", encoder_logits);
        add("noise", noise_head);
        for (std::size_t i = 0; i < decoder_hidden.size(); ++i)
            add("decoder.h" + std::to_string(i), decoder_hidden[i]);
        add("decoder.out", decoder_out);
        if (supervised) {
            for (std::size_t i = 0; i < classifier_hidden.size(); ++i)
                add("classifier.h" + std::to_string(i), classifier_hidden[i]);
            add("classifier.out", classifier_out);
        }
        return blocks;
    }

    void zero_grads() {
        for (auto& l : encoder_hidden) l.zero_grads();
        encoder_logits.zero_grads();
        noise_head.zero_grads();
        for (auto& l : decoder_hidden) l.zero_grads();
        decoder_out.zero_grads();
        for (auto& l : classifier_hidden) l.zero_grads();
        if (supervised) classifier_out.zero_grads();
    }
};

// ---------------------------------------------------------------------------
// Forward trace: every intermediate needed for the backward pass and the
// rate/distortion diagnostics.
// ---------------------------------------------------------------------------

struct ForwardTrace {
    std::vector<Vec> enc_pre, enc_act;  // per hidden layer (act = post-ReLU)
    Vec dropout_mask;                   // empty when inactive
    Vec enc_logit_input;                // input actually fed to the logit layer
    Vec enc_logits;                     // a = g_phi(x)
    Vec h;                              // sigmoid(a), in (0,1)^l

    Vec mu;          // uniforms (stochastic binarization only)
    Vec z;           // the code, 0/1 values (equals h in identity mode)
    Vec log_sigma2;  // noise head output (data-dependent mode)
    Vec sigma;       // per-bit noise scale actually applied
    Vec eps;         // standard normal draws
    Vec zprime;      // decoder input code

    std::vector<Vec> dec_pre, dec_act;
    Vec dec_logits;       // u over the vocabulary
    Vec dec_log_softmax;  // log q(x_i = w | z')
    double recon_ll = 0.0;  // sum_w count(w) * log softmax(u)_w

    std::vector<Vec> cls_pre, cls_act;
    Vec cls_logits, cls_log_softmax;

    double kl = 0.0;
    double dis = 0.0;  // cross-entropy classifier loss (0 when unused)
    int label = -1;

    bool training = false;
    Binarization binarization = Binarization::deterministic;
    NoiseMode noise = NoiseMode::none;
};

// Frozen stochastic draws; used by gradient tests so central differences see
// a deterministic objective.
struct NoiseDraws {
    Vec mu;   // uniforms for stochastic binarization
    Vec eps;  // standard normals for the noise path
};

struct LossReport {
    double recon = 0.0;  // -E[log q(x|z)]
    double kl = 0.0;
    double dis = 0.0;
    double total = 0.0;
    double rate_sampled = 0.0;  // bits, at the sampled code
    double rate_map = 0.0;      // bits, at the MAP code (always <= l)
    double distortion = 0.0;
};

// ---------------------------------------------------------------------------
// Binarization ops
// ---------------------------------------------------------------------------

inline HashCode binarize_deterministic(const Vec& h) {
    HashCode code(static_cast<std::uint32_t>(h.size()));
    for (std::uint32_t i = 0; i < code.length; ++i)
        if (h[i] > 0.5) code.set_bit(i, true);  // exact 0.5 maps to bit 0
    return code;
}

inline std::pair<HashCode, Vec> binarize_stochastic(const Vec& h, Rng& rng) {
    Vec mu(h.size());
    for (double& m : mu) m = rng.uniform();
    HashCode code(static_cast<std::uint32_t>(h.size()));
    for (std::uint32_t i = 0; i < code.length; ++i)
        if (h[i] > mu[i]) code.set_bit(i, true);
    return {code, mu};
}

// ---------------------------------------------------------------------------
// KL(q(z|x) || p(z)) for factorized Bernoullis, computed on probabilities.
// ---------------------------------------------------------------------------

inline double kl_bernoulli(const Vec& h, const Vec& gamma) {
    NASH_REQUIRE(h.size() == gamma.size(), "kl_bernoulli: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (gamma[i] <= 0.0 || gamma[i] >= 1.0)
            throw ConfigError("kl_bernoulli: prior must lie strictly inside (0, 1)");
        double hc = std::min(std::max(h[i], kProbEps), 1.0 - kProbEps);
        kl += hc * std::log(hc / gamma[i]) + (1.0 - hc) * std::log((1.0 - hc) / (1.0 - gamma[i]));
    }
    return kl;
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

namespace detail {

inline void run_encoder(const NashParams& params, const DocumentVector& doc,
                        const TrainConfig& cfg, Rng* rng, bool training, ForwardTrace& trace) {
    NASH_REQUIRE(!doc.entries.empty(), "encode: document has no nonzero entry");
    trace.enc_pre.clear();
    trace.enc_act.clear();
    const Vec* cur = nullptr;
    for (std::size_t i = 0; i < params.encoder_hidden.size(); ++i) {
        Vec pre = i == 0 ? params.encoder_hidden[i].forward(doc.entries)
                         : params.encoder_hidden[i].forward(*cur);
        trace.enc_act.push_back(relu(pre));
        trace.enc_pre.push_back(std::move(pre));
        cur = &trace.enc_act.back();
    }

    double drop_rate = 1.0 - cfg.dropout_keep;
    if (cur != nullptr && training && drop_rate > 0.0) {
        NASH_REQUIRE(rng != nullptr, "encode: dropout requires an RNG");
        auto [dropped, mask] = dropout(*cur, drop_rate, *rng, true);
        trace.dropout_mask = std::move(mask);
        trace.enc_logit_input = std::move(dropped);
    } else {
        trace.dropout_mask.clear();
        if (cur != nullptr) trace.enc_logit_input = *cur;
        else trace.enc_logit_input.clear();
    }

    trace.enc_logits = params.encoder_hidden.empty()
                           ? params.encoder_logits.forward(doc.entries)
                           : params.encoder_logits.forward(trace.enc_logit_input);
    if (!all_finite(trace.enc_logits)) throw ModelError("non-finite encoder activation");
    trace.h = sigmoid(trace.enc_logits);
    trace.training = training;
}

}  // namespace detail

// h = sigma(g_phi(x)) plus the partial trace behind it.
inline std::pair<Vec, ForwardTrace> encode_probs(const NashParams& params,
                                                 const DocumentVector& doc,
                                                 const TrainConfig& cfg, Rng* rng,
                                                 bool training) {
    ForwardTrace trace;
    detail::run_encoder(params, doc, cfg, rng, training, trace);
    return {trace.h, std::move(trace)};
}

// Deterministic test-time code for a document (dropout off, hard threshold).
inline HashCode encode_code(const NashParams& params, const DocumentVector& doc,
                            const TrainConfig& cfg) {
    ForwardTrace trace;
    detail::run_encoder(params, doc, cfg, nullptr, false, trace);
    return binarize_deterministic(trace.h);
}

// ---------------------------------------------------------------------------
// Noise injection: none / fixed sigma / data-dependent sigma predicted from
// the encoder logits. Reparameterized so gradients flow to the noise head.
// ---------------------------------------------------------------------------

namespace detail {

inline void run_noise(const NashParams& params, const TrainConfig& cfg, Rng* rng,
                      const NoiseDraws* frozen, ForwardTrace& trace) {
    trace.noise = cfg.noise;
    const std::size_t l = trace.z.size();
    if (cfg.noise == NoiseMode::none) {
        trace.zprime = trace.z;
        return;
    }
    trace.eps.resize(l);
    if (frozen != nullptr) {
        NASH_REQUIRE(frozen->eps.size() == l, "frozen noise draw has wrong length");
        trace.eps = frozen->eps;
    } else {
        NASH_REQUIRE(rng != nullptr, "noise injection requires an RNG");
        for (double& e : trace.eps) e = rng->normal();
    }
    if (cfg.noise == NoiseMode::fixed) {
        trace.sigma.assign(l, cfg.fixed_sigma);
    } else {
        trace.log_sigma2 = params.noise_head.forward(trace.enc_logits);
        trace.sigma.resize(l);
        for (std::size_t i = 0; i < l; ++i) {
            double s = std::exp(0.5 * trace.log_sigma2[i]);
            if (!std::isfinite(s)) throw ModelError("non-finite noise sigma");
            trace.sigma[i] = std::min(std::max(s, kSigmaMin), kSigmaMax);
        }
    }
    trace.zprime.resize(l);
    for (std::size_t i = 0; i < l; ++i) trace.zprime[i] = trace.z[i] + trace.sigma[i] * trace.eps[i];
}

}  // namespace detail

// Standalone form of the noise op; z comes in packed, z' leaves real-valued.
inline Vec inject_noise(const HashCode& z, const NashParams& params, const Vec& encoder_logits,
                        Rng& rng, const TrainConfig& cfg) {
    ForwardTrace trace;
    trace.z = unpack_bits(z);
    trace.enc_logits = encoder_logits;
    detail::run_noise(params, cfg, &rng, nullptr, trace);
    return trace.zprime;
}

// ---------------------------------------------------------------------------
// Decoder / classifier
// ---------------------------------------------------------------------------

namespace detail {

inline void run_decoder(const NashParams& params, const DocumentVector& doc, ForwardTrace& trace) {
    trace.dec_pre.clear();
    trace.dec_act.clear();
    const Vec* cur = &trace.zprime;
    for (const auto& layer : params.decoder_hidden) {
        Vec pre = layer.forward(*cur);
        trace.dec_act.push_back(relu(pre));
        trace.dec_pre.push_back(std::move(pre));
        cur = &trace.dec_act.back();
    }
    trace.dec_logits = params.decoder_out.forward(*cur);
    trace.dec_log_softmax = log_softmax(trace.dec_logits);
    double ll = 0.0;
    for (const auto& [t, c] : doc.raw_counts)
        ll += static_cast<double>(c) * trace.dec_log_softmax[static_cast<std::size_t>(t)];
    trace.recon_ll = ll;
}

inline void run_classifier(const NashParams& params, int label, ForwardTrace& trace) {
    trace.cls_pre.clear();
    trace.cls_act.clear();
    const Vec* cur = &trace.z;
    for (const auto& layer : params.classifier_hidden) {
        Vec pre = layer.forward(*cur);
        trace.cls_act.push_back(relu(pre));
        trace.cls_pre.push_back(std::move(pre));
        cur = &trace.cls_act.back();
    }
    trace.cls_logits = params.classifier_out.forward(*cur);
    trace.cls_log_softmax = log_softmax(trace.cls_logits);
    trace.dis = -trace.cls_log_softmax[static_cast<std::size_t>(label)];
    trace.label = label;
}

}  // namespace detail

// log q(x|z') = sum_i log q(x_i|z'), the word-occurrence multiset likelihood.
inline double decode_logprob(const NashParams& params, const Vec& zprime,
                             const DocumentVector& doc) {
    NASH_REQUIRE(static_cast<int>(zprime.size()) == params.decoder_input_dim() ||
                     static_cast<int>(zprime.size()) == params.bits,
                 "decode_logprob: code length mismatch");
    ForwardTrace trace;
    trace.zprime = zprime;
    detail::run_decoder(params, doc, trace);
    return trace.recon_ll;
}

// Log-probability of label y under the classifier head. Supervised mode only.
inline double classify_logprob(const NashParams& params, const HashCode& z, int y) {
    NASH_REQUIRE(params.supervised, "classify_logprob: model is not supervised");
    NASH_REQUIRE(y >= 0 && y < params.num_classes, "classify_logprob: label out of range");
    ForwardTrace trace;
    trace.z = unpack_bits(z);
    detail::run_classifier(params, y, trace);
    return trace.cls_log_softmax[static_cast<std::size_t>(y)];
}

// ---------------------------------------------------------------------------
// Full forward pass. `frozen` fixes the stochastic draws (mu, eps); dropout is
// active only when training and no frozen draws are supplied.
// ---------------------------------------------------------------------------

inline ForwardTrace forward(const NashParams& params, const DocumentVector& doc,
                            const TrainConfig& cfg, Rng* rng, bool training,
                            const NoiseDraws* frozen = nullptr) {
    ForwardTrace trace;
    bool use_dropout = training && frozen == nullptr;
    detail::run_encoder(params, doc, cfg, rng, use_dropout, trace);
    trace.binarization = cfg.binarization;

    const std::size_t l = trace.h.size();
    switch (cfg.binarization) {
        case Binarization::deterministic:
            trace.z.resize(l);
            for (std::size_t i = 0; i < l; ++i) trace.z[i] = trace.h[i] > 0.5 ? 1.0 : 0.0;
            break;
        case Binarization::stochastic: {
            trace.mu.resize(l);
            if (frozen != nullptr) {
                NASH_REQUIRE(frozen->mu.size() == l, "frozen uniform draw has wrong length");
                trace.mu = frozen->mu;
            } else {
                NASH_REQUIRE(rng != nullptr, "stochastic binarization requires an RNG");
                for (double& m : trace.mu) m = rng->uniform();
            }
            trace.z.resize(l);
            for (std::size_t i = 0; i < l; ++i) trace.z[i] = trace.h[i] > trace.mu[i] ? 1.0 : 0.0;
            break;
        }
        case Binarization::identity:
            trace.z = trace.h;
            break;
    }

    detail::run_noise(params, cfg, rng, frozen, trace);
    detail::run_decoder(params, doc, trace);

    Vec gamma(l, cfg.prior_gamma);
    trace.kl = kl_bernoulli(trace.h, gamma);

    if (cfg.supervised && doc.label >= 0) detail::run_classifier(params, doc.label, trace);
    return trace;
}

// ---------------------------------------------------------------------------
// Rate/distortion diagnostics (monitoring only, never optimized).
//   rate       = -sum_i log2 q(z_i|x) at the sampled code
//   rate_map   = -sum_i log2 max(h_i, 1-h_i)   (<= l by construction)
//   distortion = || x_norm - E z ||^2 with x_norm the L2-normalized features
// ---------------------------------------------------------------------------

struct RateDistortion {
    double rate_sampled = 0.0;
    double rate_map = 0.0;
    double distortion = 0.0;
};

inline RateDistortion rate_distortion_report(const ForwardTrace& trace, const NashParams& params,
                                             const DocumentVector& doc) {
    constexpr double inv_ln2 = 1.4426950408889634;
    RateDistortion rd;
    for (std::size_t i = 0; i < trace.h.size(); ++i) {
        double hc = std::min(std::max(trace.h[i], kProbEps), 1.0 - kProbEps);
        rd.rate_sampled -=
            (trace.z[i] * std::log(hc) + (1.0 - trace.z[i]) * std::log(1.0 - hc)) * inv_ln2;
        rd.rate_map -= std::log(std::max(hc, 1.0 - hc)) * inv_ln2;
    }

    // Reconstruction before the bias: subtracting it from the logits reuses
    // the forward pass instead of a second matvec over the vocabulary.
    double norm_sq = 0.0;
    for (const auto& [t, w] : doc.entries) norm_sq += w * w;
    double inv_norm = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
    double dist = 0.0;
    for (std::size_t w = 0; w < trace.dec_logits.size(); ++w) {
        double recon = trace.dec_logits[w] - params.decoder_out.bias[w];
        dist += recon * recon;
    }
    for (const auto& [t, x] : doc.entries) {
        double xn = x * inv_norm;
        double recon = trace.dec_logits[static_cast<std::size_t>(t)] -
                       params.decoder_out.bias[static_cast<std::size_t>(t)];
        dist += xn * xn - 2.0 * xn * recon;
    }
    rd.distortion = dist;
    return rd;
}

// ---------------------------------------------------------------------------
// Backward pass. Accumulates gradients into the parameter buffers.
//
// The straight-through estimator passes dL/dz to h with dz/dh treated as 1,
// then through the sigmoid and encoder analytically. Decoder, classifier, KL
// and (reparameterized) noise-head gradients are exact.
// ---------------------------------------------------------------------------

inline void backward(NashParams& params, const ForwardTrace& trace, const DocumentVector& doc,
                     const TrainConfig& cfg) {
    const std::size_t l = trace.h.size();

    // d(-log q(x|z'))/du = T * softmax(u) - counts
    double total_count = 0.0;
    for (const auto& [t, c] : doc.raw_counts) total_count += static_cast<double>(c);
    Vec du(trace.dec_log_softmax.size());
    for (std::size_t w = 0; w < du.size(); ++w)
        du[w] = total_count * std::exp(trace.dec_log_softmax[w]);
    for (const auto& [t, c] : doc.raw_counts)
        du[static_cast<std::size_t>(t)] -= static_cast<double>(c);

    const Vec& dec_in = trace.dec_act.empty() ? trace.zprime : trace.dec_act.back();
    Vec dcur = params.decoder_out.backward(dec_in, du);
    for (std::size_t i = params.decoder_hidden.size(); i-- > 0;) {
        Vec dpre = relu_backward(trace.dec_pre[i], dcur);
        const Vec& input = i == 0 ? trace.zprime : trace.dec_act[i - 1];
        dcur = params.decoder_hidden[i].backward(input, dpre);
    }
    Vec dzprime = std::move(dcur);  // dL/dz'

    // dL/dz: the decoder path passes through z' with unit Jacobian; the
    // classifier path (clean code) is exact.
    Vec dz = dzprime;
    if (cfg.supervised && trace.label >= 0) {
        Vec dv(trace.cls_log_softmax.size());
        for (std::size_t i = 0; i < dv.size(); ++i)
            dv[i] = cfg.alpha * std::exp(trace.cls_log_softmax[i]);
        dv[static_cast<std::size_t>(trace.label)] -= cfg.alpha;
        const Vec& cls_in = trace.cls_act.empty() ? trace.z : trace.cls_act.back();
        Vec dc = params.classifier_out.backward(cls_in, dv);
        for (std::size_t i = params.classifier_hidden.size(); i-- > 0;) {
            Vec dpre = relu_backward(trace.cls_pre[i], dc);
            const Vec& input = i == 0 ? trace.z : trace.cls_act[i - 1];
            dc = params.classifier_hidden[i].backward(input, dpre);
        }
        for (std::size_t i = 0; i < l; ++i) dz[i] += dc[i];
    }

    // Noise head (data-dependent mode): dL/d log sigma^2 via reparameterization,
    // gated where the sigma clamp is active.
    Vec da_noise;
    if (cfg.noise == NoiseMode::data_dependent) {
        Vec dlog_sigma2(l);
        for (std::size_t i = 0; i < l; ++i) {
            double raw = std::exp(0.5 * trace.log_sigma2[i]);
            bool clamped = raw < kSigmaMin || raw > kSigmaMax;
            double dsigma = dzprime[i] * trace.eps[i];
            dlog_sigma2[i] = clamped ? 0.0 : 0.5 * trace.sigma[i] * dsigma;
        }
        da_noise = params.noise_head.backward(trace.enc_logits, dlog_sigma2);
    }

    // Straight-through: dL/dh takes dz/dh ~= 1, plus the exact KL term.
    Vec dh(l);
    for (std::size_t i = 0; i < l; ++i) {
        double hc = std::min(std::max(trace.h[i], kProbEps), 1.0 - kProbEps);
        double dkl = std::log(hc / cfg.prior_gamma) - std::log((1.0 - hc) / (1.0 - cfg.prior_gamma));
        dh[i] = dz[i] + dkl;
    }

    Vec da(l);
    for (std::size_t i = 0; i < l; ++i) {
        da[i] = dh[i] * trace.h[i] * (1.0 - trace.h[i]);
        if (!da_noise.empty()) da[i] += da_noise[i];
    }

    if (params.encoder_hidden.empty()) {
        params.encoder_logits.backward(doc.entries, da);
        return;
    }
    Vec dlast = params.encoder_logits.backward(trace.enc_logit_input, da);
    if (!trace.dropout_mask.empty())
        for (std::size_t i = 0; i < dlast.size(); ++i) dlast[i] *= trace.dropout_mask[i];
    for (std::size_t i = params.encoder_hidden.size(); i-- > 0;) {
        Vec dpre = relu_backward(trace.enc_pre[i], dlast);
        if (i == 0) {
            params.encoder_hidden[0].backward(doc.entries, dpre);
        } else {
            dlast = params.encoder_hidden[i].backward(trace.enc_act[i - 1], dpre);
        }
    }
}

// ---------------------------------------------------------------------------
// Loss assembly: loss = -E_q[log q(x|z)] + KL + alpha * L_dis, one Monte
// Carlo sample of (mu, eps) per call. Gradients accumulate into `params`.
// ---------------------------------------------------------------------------

inline LossReport loss_and_grads(NashParams& params, const DocumentVector& doc,
                                 const TrainConfig& cfg, Rng* rng, bool training = true,
                                 const NoiseDraws* frozen = nullptr) {
    ForwardTrace trace = forward(params, doc, cfg, rng, training, frozen);
    LossReport report;
    report.recon = -trace.recon_ll;
    report.kl = trace.kl;
    report.dis = trace.dis;
    report.total = report.recon + report.kl + cfg.alpha * report.dis;
    if (!std::isfinite(report.recon)) throw ModelError("non-finite reconstruction loss");
    if (!std::isfinite(report.kl)) throw ModelError("non-finite KL loss");
    if (!std::isfinite(report.dis)) throw ModelError("non-finite discriminative loss");

    RateDistortion rd = rate_distortion_report(trace, params, doc);
    report.rate_sampled = rd.rate_sampled;
    report.rate_map = rd.rate_map;
    report.distortion = rd.distortion;

    backward(params, trace, doc, cfg);
    return report;
}

}  // namespace nash
