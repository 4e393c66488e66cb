#include "layers.hpp"

#include "tsr/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace tsr::regressor::nn {

namespace {

constexpr double kLayerNormEps = 1e-5;

void add_bias(MatView y, ConstMatView b) {
    for (std::size_t r = 0; r < y.rows; ++r) {
        kernels::active().axpy(1.0, b.data, y.data + r * y.cols, y.cols);
    }
}

void accumulate_colsum(ConstMatView dy, MatView db) {
    for (std::size_t r = 0; r < dy.rows; ++r) {
        kernels::active().axpy(1.0, dy.data + r * dy.cols, db.data, dy.cols);
    }
}

void xavier(MatView w, Rng& rng, double scale = 1.0) {
    const double a = scale * std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (std::size_t i = 0; i < w.size(); ++i) w.data[i] = rng.uniform(-a, a);
}

// Copies columns [h*dh, (h+1)*dh) of `src` into the contiguous `dst`.
void gather_head(ConstMatView src, std::size_t h, std::size_t dh, Matrix& dst) {
    dst.reset(src.rows, dh);
    for (std::size_t r = 0; r < src.rows; ++r) {
        std::copy_n(src.data + r * src.cols + h * dh, dh, dst.data() + r * dh);
    }
}

void scatter_head(ConstMatView src, std::size_t h, MatView dst) {
    const std::size_t dh = src.cols;
    for (std::size_t r = 0; r < src.rows; ++r) {
        std::copy_n(src.data + r * dh, dh, dst.data + r * dst.cols + h * dh);
    }
}

} // namespace

void record_signs(ConstMatView m, KinkTrace* trace) {
    if (!trace) return;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double v = m.data[i];
        trace->push_back(static_cast<std::int8_t>((v > 0.0) - (v < 0.0)));
    }
}

void relu_inplace(Matrix& m, KinkTrace* trace) noexcept {
    if (trace) record_signs(m, trace);
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

void relu_backward(ConstMatView pre, Matrix& dy) noexcept {
    for (std::size_t i = 0; i < dy.size(); ++i) {
        if (!(pre.data[i] > 0.0)) dy.data()[i] = 0.0;
    }
}

// ---------------------------------------------------------------------------

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in_, std::size_t out_)
    : w(store.add(name + ".w", in_, out_)), b(store.add(name + ".b", 1, out_)), in(in_), out(out_) {}

void Linear::init(ParamStore& store, Rng& rng, double bias, double scale) const {
    xavier(store.value(w), rng, scale);
    MatView bv = store.value(b);
    std::fill(bv.data, bv.data + bv.size(), bias);
}

void Linear::forward(const ParamStore& store, ConstMatView x, Matrix& y) const {
    y.reset(x.rows, out);
    matmul(x, store.value(w), y);
    add_bias(y, store.value(b));
}

void Linear::backward(ParamStore& store, ConstMatView x, ConstMatView dy, Matrix* dx) const {
    matmul_tn(x, dy, store.grad(w), true);
    accumulate_colsum(dy, store.grad(b));
    if (dx) {
        dx->reset(dy.rows, in);
        matmul_nt(dy, store.value(w), *dx);
    }
}

// ---------------------------------------------------------------------------

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::size_t d_)
    : gain(store.add(name + ".gain", 1, d_)), bias(store.add(name + ".bias", 1, d_)), d(d_) {}

void LayerNorm::init(ParamStore& store) const {
    MatView g = store.value(gain);
    std::fill(g.data, g.data + g.size(), 1.0);
    MatView b = store.value(bias);
    std::fill(b.data, b.data + b.size(), 0.0);
}

void LayerNorm::forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache) const {
    const ConstMatView g = store.value(gain);
    const ConstMatView b = store.value(bias);
    y.reset(x.rows, d);
    cache.xhat.reset(x.rows, d);
    cache.inv_std.assign(x.rows, 0.0);
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.data + r * d;
        double mean = 0.0;
        for (std::size_t c = 0; c < d; ++c) mean += xr[c];
        mean *= inv_d;
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
        var *= inv_d;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        cache.inv_std[r] = inv;
        for (std::size_t c = 0; c < d; ++c) {
            const double xh = (xr[c] - mean) * inv;
            cache.xhat(r, c) = xh;
            y(r, c) = g.data[c] * xh + b.data[c];
        }
    }
}

void LayerNorm::backward(ParamStore& store, ConstMatView dy, const Cache& cache, Matrix& dx) const {
    const ConstMatView g = std::as_const(store).value(gain);
    MatView dg = store.grad(gain);
    MatView db = store.grad(bias);
    dx.reset(dy.rows, d);
    const double inv_d = 1.0 / static_cast<double>(d);
    std::vector<double> dxhat(d);
    for (std::size_t r = 0; r < dy.rows; ++r) {
        double m1 = 0.0;
        double m2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double gy = dy(r, c);
            const double xh = cache.xhat(r, c);
            dg.data[c] += gy * xh;
            db.data[c] += gy;
            dxhat[c] = gy * g.data[c];
            m1 += dxhat[c];
            m2 += dxhat[c] * xh;
        }
        m1 *= inv_d;
        m2 *= inv_d;
        const double inv = cache.inv_std[r];
        for (std::size_t c = 0; c < d; ++c) dx(r, c) = inv * (dxhat[c] - m1 - cache.xhat(r, c) * m2);
    }
}

// ---------------------------------------------------------------------------

// No key bias: it shifts every score in a row equally and cancels in the
// softmax, so its gradient is identically zero.
SelfAttention::SelfAttention(ParamStore& store, const std::string& name, std::size_t d_, std::size_t heads_)
    : wq(store.add(name + ".wq", d_, d_)),
      bq(store.add(name + ".bq", 1, d_)),
      wk(store.add(name + ".wk", d_, d_)),
      wv(store.add(name + ".wv", d_, d_)),
      bv(store.add(name + ".bv", 1, d_)),
      out(store, name + ".out", d_, d_),
      d(d_),
      heads(heads_) {}

void SelfAttention::init(ParamStore& store, Rng& rng) const {
    xavier(store.value(wq), rng);
    xavier(store.value(wk), rng);
    xavier(store.value(wv), rng);
    for (Handle h : {bq, bv}) {
        MatView b = store.value(h);
        std::fill(b.data, b.data + b.size(), 0.0);
    }
    out.init(store, rng);
}

void SelfAttention::forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache) const {
    const std::size_t n = x.rows;
    const std::size_t dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix q(n, d);
    Matrix k(n, d);
    Matrix v(n, d);
    matmul(x, store.value(wq), q);
    add_bias(q, store.value(bq));
    matmul(x, store.value(wk), k);
    matmul(x, store.value(wv), v);
    add_bias(v, store.value(bv));

    cache.q.resize(heads);
    cache.k.resize(heads);
    cache.v.resize(heads);
    cache.probs.resize(heads);
    cache.merged.reset(n, d);
    Matrix head_out;
    for (std::size_t h = 0; h < heads; ++h) {
        gather_head(q, h, dh, cache.q[h]);
        gather_head(k, h, dh, cache.k[h]);
        gather_head(v, h, dh, cache.v[h]);
        Matrix& p = cache.probs[h];
        p.reset(n, n);
        matmul_nt(cache.q[h], cache.k[h], p);
        for (std::size_t r = 0; r < n; ++r) {
            double* row = p.data() + r * n;
            double mx = row[0] * scale;
            for (std::size_t c = 0; c < n; ++c) mx = std::max(mx, row[c] * scale);
            double sum = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                row[c] = std::exp(row[c] * scale - mx);
                sum += row[c];
            }
            const double inv = 1.0 / sum;
            for (std::size_t c = 0; c < n; ++c) row[c] *= inv;
        }
        head_out.reset(n, dh);
        matmul(p, cache.v[h], head_out);
        scatter_head(head_out, h, cache.merged);
    }
    out.forward(store, cache.merged, y);
}

void SelfAttention::backward(ParamStore& store, ConstMatView x, ConstMatView dy, const Cache& cache, Matrix& dx) const {
    const std::size_t n = x.rows;
    const std::size_t dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix dmerged;
    out.backward(store, cache.merged, dy, &dmerged);

    Matrix dq(n, d);
    Matrix dk(n, d);
    Matrix dv(n, d);
    Matrix d_out;
    Matrix dp(n, n);
    Matrix dqh(n, dh);
    Matrix dkh(n, dh);
    Matrix dvh(n, dh);
    for (std::size_t h = 0; h < heads; ++h) {
        const Matrix& p = cache.probs[h];
        gather_head(dmerged, h, dh, d_out);
        matmul_nt(d_out, cache.v[h], dp);
        matmul_tn(p, d_out, dvh);
        // softmax reverse: dS = P * (dP - rowsum(P * dP)), folded with the score scale
        for (std::size_t r = 0; r < n; ++r) {
            const double* pr = p.data() + r * n;
            double* dr = dp.data() + r * n;
            const double dotv = kernels::active().dot(pr, dr, n);
            for (std::size_t c = 0; c < n; ++c) dr[c] = pr[c] * (dr[c] - dotv) * scale;
        }
        matmul(dp, cache.k[h], dqh);
        matmul_tn(dp, cache.q[h], dkh);
        scatter_head(dqh, h, dq);
        scatter_head(dkh, h, dk);
        scatter_head(dvh, h, dv);
    }

    matmul_tn(x, dq, store.grad(wq), true);
    accumulate_colsum(dq, store.grad(bq));
    matmul_tn(x, dk, store.grad(wk), true);
    matmul_tn(x, dv, store.grad(wv), true);
    accumulate_colsum(dv, store.grad(bv));

    dx.reset(n, d);
    matmul_nt(dq, std::as_const(store).value(wq), dx);
    matmul_nt(dk, std::as_const(store).value(wk), dx, true);
    matmul_nt(dv, std::as_const(store).value(wv), dx, true);
}

// ---------------------------------------------------------------------------

EncoderLayer::EncoderLayer(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads, std::size_t ffn)
    : ln1(store, name + ".ln1", d),
      attn(store, name + ".attn", d, heads),
      ln2(store, name + ".ln2", d),
      ff1(store, name + ".ff1", d, ffn),
      ff2(store, name + ".ff2", ffn, d) {}

void EncoderLayer::init(ParamStore& store, Rng& rng) const {
    ln1.init(store);
    attn.init(store, rng);
    ln2.init(store);
    ff1.init(store, rng);
    ff2.init(store, rng);
}

void EncoderLayer::forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache, KinkTrace* trace) const {
    cache.x.reset(x.rows, x.cols);
    std::copy_n(x.data, x.size(), cache.x.data());

    ln1.forward(store, x, cache.u1, cache.ln1);
    Matrix a;
    attn.forward(store, cache.u1, a, cache.attn);
    cache.x1 = cache.x;
    kernels::active().axpy(1.0, a.data(), cache.x1.data(), a.size());

    ln2.forward(store, cache.x1, cache.u2, cache.ln2);
    ff1.forward(store, cache.u2, cache.pre);
    cache.hidden = cache.pre;
    relu_inplace(cache.hidden, trace);
    ff2.forward(store, cache.hidden, y);
    kernels::active().axpy(1.0, cache.x1.data(), y.data(), y.size());
}

void EncoderLayer::backward(ParamStore& store, ConstMatView dy, Cache& cache, Matrix& dx) const {
    Matrix dhidden;
    ff2.backward(store, cache.hidden, dy, &dhidden);
    relu_backward(cache.pre, dhidden);
    Matrix du2;
    ff1.backward(store, cache.u2, dhidden, &du2);
    Matrix dx1;
    ln2.backward(store, du2, cache.ln2, dx1);
    kernels::active().axpy(1.0, dy.data, dx1.data(), dx1.size());

    Matrix du1;
    attn.backward(store, cache.u1, dx1, cache.attn, du1);
    ln1.backward(store, du1, cache.ln1, dx);
    kernels::active().axpy(1.0, dx1.data(), dx.data(), dx.size());
}

// ---------------------------------------------------------------------------

Encoder::Encoder(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads, std::size_t ffn, int depth)
    : final_ln(store, name + ".final_ln", d) {
    layers.reserve(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) layers.emplace_back(store, name + ".layer" + std::to_string(l), d, heads, ffn);
}

void Encoder::init(ParamStore& store, Rng& rng) const {
    for (const EncoderLayer& l : layers) l.init(store, rng);
    final_ln.init(store);
}

void Encoder::forward(const ParamStore& store, ConstMatView x, Matrix& y, Cache& cache, KinkTrace* trace) const {
    cache.layers.resize(layers.size());
    Matrix cur(x.rows, x.cols);
    std::copy_n(x.data, x.size(), cur.data());
    Matrix next;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].forward(store, cur, next, cache.layers[l], trace);
        std::swap(cur, next);
    }
    cache.last = std::move(cur);
    final_ln.forward(store, cache.last, y, cache.final_ln);
}

void Encoder::backward(ParamStore& store, ConstMatView dy, Cache& cache, Matrix& dx) const {
    Matrix cur;
    final_ln.backward(store, dy, cache.final_ln, cur);
    Matrix next;
    for (std::size_t l = layers.size(); l-- > 0;) {
        layers[l].backward(store, cur, cache.layers[l], next);
        std::swap(cur, next);
    }
    dx = std::move(cur);
}

} // namespace tsr::regressor::nn
