#pragma once

// Building blocks with explicit forward caches and reverse passes. Every
// backward() accumulates parameter gradients into the ParamStore and writes
// (not accumulates) the input gradient when one is requested.

#include "tsr/regressor.hpp"
#include "tsr/random.hpp"

#include <vector>

namespace tsr::regressor::nn {

using Handle = ParamStore::Handle;

struct Linear {
    Handle w = 0;  // in x out
    Handle b = 0;  // 1 x out
    std::size_t in = 0;
    std::size_t out = 0;

    Linear() = default;
    Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out);

    void init(ParamStore& store, Rng& rng, double bias = 0.0, double scale = 1.0) const;
    void forward(const ParamStore& store, ConstMatView x, Matrix& y) const;
    void backward(ParamStore& store, ConstMatView x, ConstMatView dy, Matrix* dx) const;
};

struct LayerNorm {
    Handle gain = 0;
    Handle bias = 0;
    std::size_t d = 0;

    struct Cache {
        Matrix xhat;
        std::vector<double> inv_std;
    };

    LayerNorm() = default;
    LayerNorm(ParamStore& store, const std::string& name, std::size_t d);

    void init(ParamStore& store) const;
    void forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache) const;
    void backward(ParamStore& store, ConstMatView dy, const Cache& cache, Matrix& dx) const;
};

struct SelfAttention {
    Handle wq = 0, bq = 0, wk = 0, wv = 0, bv = 0;
    Linear out;
    std::size_t d = 0;
    std::size_t heads = 0;

    struct Cache {
        std::vector<Matrix> q, k, v;  // per head, N x dh
        std::vector<Matrix> probs;    // per head, N x N
        Matrix merged;                // N x d, concatenated head outputs
    };

    SelfAttention() = default;
    SelfAttention(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads);

    void init(ParamStore& store, Rng& rng) const;
    void forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache) const;
    void backward(ParamStore& store, ConstMatView x, ConstMatView dy, const Cache& cache, Matrix& dx) const;
};

/// Pre-norm transformer layer: x + Attn(LN(x)), then + FFN(LN(.)).
struct EncoderLayer {
    LayerNorm ln1;
    SelfAttention attn;
    LayerNorm ln2;
    Linear ff1;
    Linear ff2;

    struct Cache {
        LayerNorm::Cache ln1, ln2;
        SelfAttention::Cache attn;
        Matrix x;       // input
        Matrix u1;      // LN1(x)
        Matrix x1;      // after attention residual
        Matrix u2;      // LN2(x1)
        Matrix hidden;  // ReLU(ff1(u2))
        Matrix pre;     // ff1(u2)
    };

    EncoderLayer() = default;
    EncoderLayer(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads, std::size_t ffn);

    void init(ParamStore& store, Rng& rng) const;
    void forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache, KinkTrace* trace) const;
    void backward(ParamStore& store, ConstMatView dy, Cache& cache, Matrix& dx) const;
};

struct Encoder {
    std::vector<EncoderLayer> layers;
    LayerNorm final_ln;

    struct Cache {
        std::vector<EncoderLayer::Cache> layers;
        LayerNorm::Cache final_ln;
        Matrix last;  // input to final_ln
    };

    Encoder() = default;
    Encoder(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads, std::size_t ffn, int depth);

    void init(ParamStore& store, Rng& rng) const;
    void forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache, KinkTrace* trace) const;
    void backward(ParamStore& store, ConstMatView dy, Cache& cache, Matrix& dx) const;
};

void relu_inplace(Matrix& m, KinkTrace* trace) noexcept;
/// dy *= (pre > 0)
void relu_backward(ConstMatView pre, Matrix& dy) noexcept;
void record_signs(ConstMatView m, KinkTrace* trace);

} // namespace tsr::regressor::nn
