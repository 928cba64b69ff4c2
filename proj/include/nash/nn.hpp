#pragma once

// Dense neural-network substrate with hand-derived gradients: linear layers,
// ReLU / sigmoid, inverted dropout, softmax cross-entropy, Adam, and a
// finite-difference gradient checker. Everything is 64-bit floats.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nash/common.hpp"

namespace nash {

// Sparse feature row: (term id, weight) pairs with ascending ids.
using SparseVec = std::vector<std::pair<std::int32_t, double>>;

// ---------------------------------------------------------------------------
// Matrix: row-major dense matrix of doubles.
// ---------------------------------------------------------------------------

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

inline double sigmoid(double x) {
    // Branch form avoids exp overflow for large |x|; the result is clamped
    // into the open unit interval at double precision so downstream logs and
    // Bernoulli draws never see exact 0 or 1.
    constexpr double kOneBelow = 0x1.fffffffffffffp-1;  // largest double < 1
    constexpr double kFloor = 1e-300;
    double s;
    if (x >= 0.0) {
        double e = std::exp(-x);
        s = 1.0 / (1.0 + e);
    } else {
        double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::min(std::max(s, kFloor), kOneBelow);
}

inline Vec sigmoid(const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
    return out;
}

// d/dx sigmoid(x) expressed through the output value.
inline Vec sigmoid_backward(const Vec& out, const Vec& upstream) {
    NASH_REQUIRE(out.size() == upstream.size(), "sigmoid_backward: size mismatch");
    Vec dx(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) dx[i] = upstream[i] * out[i] * (1.0 - out[i]);
    return dx;
}

inline Vec relu(const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

inline Vec relu_backward(const Vec& pre, const Vec& upstream) {
    NASH_REQUIRE(pre.size() == upstream.size(), "relu_backward: size mismatch");
    Vec dx(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) dx[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
    return dx;
}

// ---------------------------------------------------------------------------
// Inverted dropout. Training mode zeroes each unit with probability `rate`
// and scales survivors by 1/(1-rate); inference mode is the identity. The
// returned mask already carries the scaling, so backward is mask * upstream.
// ---------------------------------------------------------------------------

inline std::pair<Vec, Vec> dropout(const Vec& x, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
    Vec out(x.size()), mask(x.size(), 1.0);
    if (!training || rate == 0.0) {
        out = x;
        return {out, mask};
    }
    double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask[i] = rng.uniform() < rate ? 0.0 : scale;
        out[i] = x[i] * mask[i];
    }
    return {out, mask};
}

// ---------------------------------------------------------------------------
// DenseLayer: y = W x + b with gradient buffers of matching shape.
// Backward passes accumulate into the buffers (callers zero them per batch).
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix weight;  // out x in
    Vec bias;       // out
    Matrix grad_weight;
    Vec grad_bias;

    DenseLayer() = default;
    DenseLayer(std::size_t out_dim, std::size_t in_dim)
        : weight(out_dim, in_dim),
          bias(out_dim, 0.0),
          grad_weight(out_dim, in_dim),
          grad_bias(out_dim, 0.0) {}

    std::size_t out_dim() const { return weight.rows; }
    std::size_t in_dim() const { return weight.cols; }

    // Uniform +-sqrt(6 / (fan_in + fan_out)), biases zero.
    void init(Rng& rng) {
        double bound = std::sqrt(6.0 / static_cast<double>(weight.rows + weight.cols));
        for (double& w : weight.data) w = (2.0 * rng.uniform() - 1.0) * bound;
        std::fill(bias.begin(), bias.end(), 0.0);
        zero_grads();
    }

    void zero_grads() {
        grad_weight.fill(0.0);
        std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
    }

    // Accumulation order is fixed (four-lane unroll above the size cutoff,
    // plain ascending below), so results are reproducible run to run.
    static constexpr std::size_t kUnrollCutoff = 16;

    Vec forward(const Vec& x) const {
        NASH_REQUIRE(x.size() == weight.cols, "dense_forward: input size mismatch");
        const std::size_t cols = weight.cols;
        Vec y(weight.rows);
        if (cols < kUnrollCutoff) {
            for (std::size_t i = 0; i < weight.rows; ++i) {
                const double* w = weight.row(i);
                double s = bias[i];
                for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
                y[i] = s;
            }
            return y;
        }
        for (std::size_t i = 0; i < weight.rows; ++i) {
            const double* w = weight.row(i);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            std::size_t j = 0;
            for (; j + 4 <= cols; j += 4) {
                s0 += w[j] * x[j];
                s1 += w[j + 1] * x[j + 1];
                s2 += w[j + 2] * x[j + 2];
                s3 += w[j + 3] * x[j + 3];
            }
            for (; j < cols; ++j) s0 += w[j] * x[j];
            y[i] = bias[i] + ((s0 + s1) + (s2 + s3));
        }
        return y;
    }

    Vec forward(const SparseVec& x) const {
        Vec y(bias);
        for (const auto& [t, v] : x) {
            NASH_REQUIRE(static_cast<std::size_t>(t) < weight.cols,
                         "dense_forward: sparse index out of range");
            for (std::size_t i = 0; i < weight.rows; ++i) y[i] += weight(i, static_cast<std::size_t>(t)) * v;
        }
        return y;
    }

    // Accumulates dL/dW and dL/db; returns dL/dx.
    Vec backward(const Vec& x, const Vec& upstream) {
        NASH_REQUIRE(x.size() == weight.cols && upstream.size() == weight.rows,
                     "dense_backward: size mismatch");
        for (std::size_t i = 0; i < weight.rows; ++i) {
            double u = upstream[i];
            grad_bias[i] += u;
            double* gw = grad_weight.row(i);
            for (std::size_t j = 0; j < weight.cols; ++j) gw[j] += u * x[j];
        }
        Vec dx(weight.cols, 0.0);
        if (weight.rows < kUnrollCutoff) {
            for (std::size_t j = 0; j < weight.cols; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < weight.rows; ++i) s += weight(i, j) * upstream[i];
                dx[j] = s;
            }
            return dx;
        }
        // Row-streaming form: cache-friendly and free of serial reductions.
        for (std::size_t i = 0; i < weight.rows; ++i) {
            const double* w = weight.row(i);
            double u = upstream[i];
            for (std::size_t j = 0; j < weight.cols; ++j) dx[j] += u * w[j];
        }
        return dx;
    }

    // Sparse-input variant for the first encoder layer; the input gradient is
    // never needed there.
    void backward(const SparseVec& x, const Vec& upstream) {
        NASH_REQUIRE(upstream.size() == weight.rows, "dense_backward: size mismatch");
        for (std::size_t i = 0; i < weight.rows; ++i) grad_bias[i] += upstream[i];
        for (const auto& [t, v] : x) {
            auto col = static_cast<std::size_t>(t);
            for (std::size_t i = 0; i < weight.rows; ++i) grad_weight(i, col) += upstream[i] * v;
        }
    }
};

// ---------------------------------------------------------------------------
// Softmax cross-entropy helpers (max-shifted).
// ---------------------------------------------------------------------------

inline Vec log_softmax(const Vec& logits) {
    double lz = log_sum_exp(logits);
    Vec out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
    return out;
}

inline Vec softmax(const Vec& logits) {
    Vec out = log_softmax(logits);
    for (double& x : out) x = std::exp(x);
    return out;
}

// ---------------------------------------------------------------------------
// Adam. Moments are kept per parameter block, aligned by name; the effective
// learning rate for each step is supplied by the caller (the trainer owns the
// decay schedule).
// ---------------------------------------------------------------------------

struct ParamBlock {
    std::string name;
    double* data = nullptr;
    double* grad = nullptr;
    std::size_t size = 0;
};

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<Vec> m, v;  // aligned with the block list used at init

    void init(const std::vector<ParamBlock>& blocks) {
        step = 0;
        m.clear();
        v.clear();
        for (const auto& b : blocks) {
            m.emplace_back(b.size, 0.0);
            v.emplace_back(b.size, 0.0);
        }
    }

    // One update over all blocks. grad_scale multiplies raw gradients (the
    // trainer passes 1/batch_size). Throws on non-finite gradients, naming
    // the offending block.
    void update(const std::vector<ParamBlock>& blocks, double lr, double grad_scale = 1.0) {
        NASH_REQUIRE(blocks.size() == m.size(), "adam_step: block count mismatch");
        ++step;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            const auto& b = blocks[k];
            NASH_REQUIRE(b.size == m[k].size(), "adam_step: block shape mismatch");
            for (std::size_t i = 0; i < b.size; ++i) {
                double g = b.grad[i] * grad_scale;
                if (!std::isfinite(g))
                    throw TrainingError("non-finite gradient in parameter " + b.name);
                m[k][i] = beta1 * m[k][i] + (1.0 - beta1) * g;
                v[k][i] = beta2 * v[k][i] + (1.0 - beta2) * g * g;
                double mhat = m[k][i] / bc1;
                double vhat = v[k][i] / bc2;
                b.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
                if (!std::isfinite(b.data[i]))
                    throw TrainingError("non-finite parameter after update: " + b.name);
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checker. `loss` evaluates the objective at the
// current parameter values; `compute_grads` fills the blocks' grad buffers
// analytically. Central differences with h = 1e-4.
// ---------------------------------------------------------------------------

struct GradCheckReport {
    struct Block {
        std::string name;
        double max_rel_err = 0.0;
    };
    std::vector<Block> blocks;
    double max_rel_err = 0.0;

    bool ok(double tolerance) const { return max_rel_err < tolerance; }
};

inline double rel_err(double a, double b) {
    double denom = std::max({std::fabs(a), std::fabs(b), 1e-6});
    return std::fabs(a - b) / denom;
}

inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  const std::function<void()>& compute_grads,
                                  const std::vector<ParamBlock>& blocks, double h = 1e-4) {
    compute_grads();
    std::vector<Vec> analytic;
    analytic.reserve(blocks.size());
    for (const auto& b : blocks) analytic.emplace_back(b.grad, b.grad + b.size);

    GradCheckReport report;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        double worst = 0.0;
        for (std::size_t i = 0; i < b.size; ++i) {
            double saved = b.data[i];
            b.data[i] = saved + h;
            double up = loss();
            b.data[i] = saved - h;
            double down = loss();
            b.data[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            worst = std::max(worst, rel_err(analytic[k][i], numeric));
        }
        report.blocks.push_back({b.name, worst});
        report.max_rel_err = std::max(report.max_rel_err, worst);
    }
    return report;
}

}  // namespace nash
