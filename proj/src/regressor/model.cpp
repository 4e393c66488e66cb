#include "layers.hpp"

#include "tsr/error.hpp"
#include "tsr/kernels.hpp"
#include "tsr/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tsr::regressor {

namespace {

// Output heads start near their bias so no ReLU column begins dead.
constexpr double kHeadScale = 0.1;

} // namespace

// ---------------------------------------------------------------------------
// ParamStore

ParamStore::Handle ParamStore::add(std::string name, std::size_t rows, std::size_t cols) {
    tensors_.push_back({std::move(name), rows, cols, values_.size()});
    values_.resize(values_.size() + rows * cols, 0.0);
    grads_.resize(values_.size(), 0.0);
    return tensors_.size() - 1;
}

MatView ParamStore::value(Handle h) noexcept {
    const TensorInfo& t = tensors_[h];
    return {values_.data() + t.offset, t.rows, t.cols};
}

ConstMatView ParamStore::value(Handle h) const noexcept {
    const TensorInfo& t = tensors_[h];
    return {values_.data() + t.offset, t.rows, t.cols};
}

MatView ParamStore::grad(Handle h) noexcept {
    const TensorInfo& t = tensors_[h];
    return {grads_.data() + t.offset, t.rows, t.cols};
}

std::optional<ParamStore::Handle> ParamStore::find(const std::string& name) const noexcept {
    for (std::size_t h = 0; h < tensors_.size(); ++h) {
        if (tensors_[h].name == name) return h;
    }
    return std::nullopt;
}

void ParamStore::zero_grad() noexcept { std::fill(grads_.begin(), grads_.end(), 0.0); }

// ---------------------------------------------------------------------------
// Features

std::vector<double> position_embedding(double x, double y, int d) {
    if (d <= 0 || d % 4 != 0) throw DomainError("position embedding size must be a positive multiple of 4");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
        throw DomainError("position embedding coordinates must lie in [0,1]");
    }
    const int quarter = d / 4;
    std::vector<double> pe(static_cast<std::size_t>(d));
    for (int k = 0; k < quarter; ++k) {
        const double period = std::pow(10000.0, 4.0 * k / d);
        const double ax = 2.0 * std::numbers::pi * x / period;
        const double ay = 2.0 * std::numbers::pi * y / period;
        pe[2 * k] = std::sin(ax);
        pe[2 * k + 1] = std::cos(ax);
        pe[d / 2 + 2 * k] = std::sin(ay);
        pe[d / 2 + 2 * k + 1] = std::cos(ay);
    }
    return pe;
}

CellGeometry cell_geometry(const TableGrid& grid) {
    if (grid.cells.empty()) throw EmptyInput("table has no cells");
    double sx = 0.0;
    double sy = 0.0;
    if (grid.image_size) {
        sx = grid.image_size->width;
        sy = grid.image_size->height;
    }
    for (const TableCell& c : grid.cells) {
        if (!c.quad) throw MissingQuad("cell " + std::to_string(c.id) + " has no quad");
        if (!grid.image_size) {
            for (const Point& p : c.quad->corners()) {
                sx = std::max(sx, p.x);
                sy = std::max(sy, p.y);
            }
        }
    }
    sx = sx > 0.0 ? sx : 1.0;
    sy = sy > 0.0 ? sy : 1.0;

    const std::size_t n = grid.cells.size();
    CellGeometry g;
    g.descriptors.reset(n, kDescriptorSize);
    g.corners.reset(n, 8);
    for (std::size_t i = 0; i < n; ++i) {
        const SpatialQuad& q = *grid.cells[i].quad;
        const Box box = q.bounding_box();
        const Point ctr = q.centroid();
        auto nx = [&](double v) { return std::clamp(v / sx, 0.0, 1.0); };
        auto ny = [&](double v) { return std::clamp(v / sy, 0.0, 1.0); };
        double* d = g.descriptors.data() + i * kDescriptorSize;
        d[0] = nx(ctr.x);
        d[1] = ny(ctr.y);
        d[2] = nx(box.x1 - box.x0);
        d[3] = ny(box.y1 - box.y0);
        for (std::size_t k = 0; k < 4; ++k) {
            d[4 + 2 * k] = nx(q[k].x);
            d[5 + 2 * k] = ny(q[k].y);
            g.corners(i, 2 * k) = d[4 + 2 * k];
            g.corners(i, 2 * k + 1) = d[5 + 2 * k];
        }
    }
    return g;
}

Sample make_inputs(const TableGrid& grid, int d) {
    Sample s;
    s.geometry = cell_geometry(grid);
    const std::size_t n = grid.cells.size();
    s.corner_pe.assign(4, Matrix(n, static_cast<std::size_t>(d)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto pe = position_embedding(s.geometry.corners(i, 2 * k), s.geometry.corners(i, 2 * k + 1), d);
            std::copy(pe.begin(), pe.end(), s.corner_pe[k].row(i).begin());
        }
    }
    return s;
}

Sample make_sample(const TableGrid& grid, int d) {
    Sample s = make_inputs(grid, d);
    for (const TableCell& c : grid.cells) s.truth.push_back(c.logical);

    const AdjacencySets sets = adjacency_pairs(grid);
    auto to_index = [&](const AdjacencyPair& p) { return IndexPair{*grid.index_of(p.i), *grid.index_of(p.j)}; };
    for (const AdjacencyPair& p : sets.horizontal) s.horizontal.push_back(to_index(p));
    for (const AdjacencyPair& p : sets.vertical) s.vertical.push_back(to_index(p));
    return s;
}

// ---------------------------------------------------------------------------
// Model

struct Model::Impl {
    RegressorConfig config;
    ParamStore store;

    nn::Linear stem1;
    nn::Linear stem2;
    nn::Linear corner_stem;
    nn::Handle corner_weights = 0;  // 1 x 4
    nn::Encoder base_encoder;
    nn::Linear base_head;
    nn::Handle stack_proj = 0;  // 4 x d
    nn::Encoder stack_encoder;
    nn::Linear stack_head;

    struct Cache {
        Matrix stem_pre;  // stem1 output before ReLU
        Matrix stem_hidden;
        std::vector<Matrix> corner_feat;  // corner_stem(p_k) + PE(p_k)
        std::vector<Matrix> corner_xy;    // N x 2 per corner
        Matrix h;
        nn::Encoder::Cache base_enc;
        Matrix encoded;
        Matrix base_pre;
        Matrix base;
        Matrix stack_in;
        nn::Encoder::Cache stack_enc;
        Matrix stack_encoded;
        Matrix stack_pre;
        Matrix stacked;
    };

    explicit Impl(const RegressorConfig& c) : config(c) {
        config.validate();
        const auto d = static_cast<std::size_t>(config.d);
        const auto heads = static_cast<std::size_t>(config.heads);
        const auto ffn = static_cast<std::size_t>(config.ffn_width());
        stem1 = nn::Linear(store, "stem.fc1", kDescriptorSize, d);
        stem2 = nn::Linear(store, "stem.fc2", d, d);
        corner_stem = nn::Linear(store, "corner.fc", 2, d);
        corner_weights = store.add("corner.weights", 1, 4);
        const int base_depth = config.cascade ? config.layers_base : config.layers_base + config.layers_stack;
        base_encoder = nn::Encoder(store, "base.encoder", d, heads, ffn, base_depth);
        base_head = nn::Linear(store, "base.head", d, 4);
        if (config.cascade) {
            stack_proj = store.add("stack.proj", 4, d);
            stack_encoder = nn::Encoder(store, "stack.encoder", d, heads, ffn, config.layers_stack);
            stack_head = nn::Linear(store, "stack.head", d, 4);
        }

        Rng rng(config.seed, 0x5EED);
        stem1.init(store, rng);
        stem2.init(store, rng);
        corner_stem.init(store, rng);
        MatView w = store.value(corner_weights);
        std::fill(w.data, w.data + 4, 0.25);
        base_encoder.init(store, rng);
        base_head.init(store, rng, 1.0, kHeadScale);
        if (config.cascade) {
            MatView ws = store.value(stack_proj);
            const double a = std::sqrt(6.0 / static_cast<double>(4 + d));
            for (std::size_t i = 0; i < ws.size(); ++i) ws.data[i] = rng.uniform(-a, a);
            stack_encoder.init(store, rng);
            stack_head.init(store, rng, 1.0, kHeadScale);
        }
    }

    void features(const Sample& s, Cache& c, KinkTrace* trace) const {
        const std::size_t n = s.geometry.size();
        stem1.forward(store, s.geometry.descriptors, c.stem_pre);
        c.stem_hidden = c.stem_pre;
        nn::relu_inplace(c.stem_hidden, trace);
        stem2.forward(store, c.stem_hidden, c.h);

        const ConstMatView w = store.value(corner_weights);
        c.corner_feat.resize(4);
        c.corner_xy.resize(4);
        for (std::size_t k = 0; k < 4; ++k) {
            Matrix& xy = c.corner_xy[k];
            xy.reset(n, 2);
            for (std::size_t i = 0; i < n; ++i) {
                xy(i, 0) = s.geometry.corners(i, 2 * k);
                xy(i, 1) = s.geometry.corners(i, 2 * k + 1);
            }
            corner_stem.forward(store, xy, c.corner_feat[k]);
            kernels::active().axpy(1.0, s.corner_pe[k].data(), c.corner_feat[k].data(), c.corner_feat[k].size());
            kernels::active().axpy(w.data[k], c.corner_feat[k].data(), c.h.data(), c.h.size());
        }
    }

    void features_backward(const Sample& s, Cache& c, const Matrix& dh) {
        const ConstMatView w = std::as_const(store).value(corner_weights);
        MatView dw = store.grad(corner_weights);
        Matrix dfeat;
        for (std::size_t k = 0; k < 4; ++k) {
            dw.data[k] += kernels::active().dot(dh.data(), c.corner_feat[k].data(), dh.size());
            dfeat = dh;
            for (double& v : dfeat.values()) v *= w.data[k];
            corner_stem.backward(store, c.corner_xy[k], dfeat, nullptr);
        }
        Matrix dhidden;
        stem2.backward(store, c.stem_hidden, dh, &dhidden);
        nn::relu_backward(c.stem_pre, dhidden);
        stem1.backward(store, s.geometry.descriptors, dhidden, nullptr);
    }

    void forward(const Sample& s, Cache& c, KinkTrace* trace) const {
        features(s, c, trace);
        base_encoder.forward(store, c.h, c.encoded, c.base_enc, trace);
        base_head.forward(store, c.encoded, c.base_pre);
        c.base = c.base_pre;
        nn::relu_inplace(c.base, trace);
        if (!config.cascade) {
            c.stacked = c.base;
            return;
        }
        c.stack_in = c.encoded;
        matmul(c.base, store.value(stack_proj), c.stack_in, true);
        stack_encoder.forward(store, c.stack_in, c.stack_encoded, c.stack_enc, trace);
        stack_head.forward(store, c.stack_encoded, c.stack_pre);
        c.stacked = c.stack_pre;
        nn::relu_inplace(c.stacked, trace);
    }

    void backward(const Sample& s, Cache& c, Matrix dbase, Matrix dstacked) {
        Matrix dencoded;
        if (config.cascade) {
            nn::relu_backward(c.stack_pre, dstacked);
            Matrix dstack_encoded;
            stack_head.backward(store, c.stack_encoded, dstacked, &dstack_encoded);
            Matrix dstack_in;
            stack_encoder.backward(store, dstack_encoded, c.stack_enc, dstack_in);
            matmul_tn(c.base, dstack_in, store.grad(stack_proj), true);
            matmul_nt(dstack_in, std::as_const(store).value(stack_proj), dbase, true);
            dencoded = std::move(dstack_in);
        } else {
            kernels::active().axpy(1.0, dstacked.data(), dbase.data(), dbase.size());
        }
        nn::relu_backward(c.base_pre, dbase);
        Matrix dhead_in;
        base_head.backward(store, c.encoded, dbase, &dhead_in);
        if (dencoded.size() == 0) {
            dencoded = std::move(dhead_in);
        } else {
            kernels::active().axpy(1.0, dhead_in.data(), dencoded.data(), dencoded.size());
        }
        Matrix dh;
        base_encoder.backward(store, dencoded, c.base_enc, dh);
        features_backward(s, c, dh);
    }

    Cache work;
};

Model::Model(const RegressorConfig& config) : impl_(std::make_unique<Impl>(config)) {}
Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::Model(const Model& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
Model& Model::operator=(const Model& other) {
    if (this != &other) impl_ = std::make_unique<Impl>(*other.impl_);
    return *this;
}

const RegressorConfig& Model::config() const noexcept { return impl_->config; }
ParamStore& Model::params() noexcept { return impl_->store; }
const ParamStore& Model::params() const noexcept { return impl_->store; }

Matrix Model::build_cell_features(const Sample& sample) const {
    Impl::Cache c;
    impl_->features(sample, c, nullptr);
    return c.h;
}

Matrix Model::encode(const Matrix& h, Stack stack, std::vector<Matrix>* attention) const {
    if (stack == Stack::Stacking && !impl_->config.cascade) throw ConfigError("non-cascade model has no stacking encoder");
    const nn::Encoder& enc = stack == Stack::Base ? impl_->base_encoder : impl_->stack_encoder;
    nn::Encoder::Cache cache;
    Matrix out;
    enc.forward(impl_->store, h, out, cache, nullptr);
    if (attention) {
        attention->clear();
        for (const auto& layer : cache.layers) {
            for (const Matrix& p : layer.attn.probs) attention->push_back(p);
        }
    }
    return out;
}

Matrix Model::base_regress(const Matrix& encoded) const {
    Matrix out;
    impl_->base_head.forward(impl_->store, encoded, out);
    nn::relu_inplace(out, nullptr);
    return out;
}

Matrix Model::stack_regress(const Matrix& encoded, const Matrix& base) const {
    if (!impl_->config.cascade) throw ConfigError("non-cascade model has no stacking regressor");
    if (encoded.rows() != base.rows() || base.cols() != 4) throw LengthMismatch("stack_regress shape mismatch");
    Matrix in = encoded;
    matmul(base, impl_->store.value(impl_->stack_proj), in, true);
    Matrix enc;
    nn::Encoder::Cache cache;
    impl_->stack_encoder.forward(impl_->store, in, enc, cache, nullptr);
    Matrix out;
    impl_->stack_head.forward(impl_->store, enc, out);
    nn::relu_inplace(out, nullptr);
    return out;
}

Prediction Model::predict(const Sample& sample, KinkTrace* trace) const {
    Impl::Cache c;
    impl_->forward(sample, c, trace);
    return {std::move(c.base), std::move(c.stacked)};
}

LossBreakdown Model::output_loss(const Sample& sample, ConstMatView base, ConstMatView stacked, Matrix* grad_base,
                                 Matrix* grad_stacked, KinkTrace* trace) const {
    const RegressorConfig& config = impl_->config;
    if (config.cascade) {
        return total_loss(base, stacked, sample.truth, sample.horizontal, sample.vertical, config.loss_flags,
                          grad_base, grad_stacked, trace);
    }
    // A single regressor contributes one L1 term and carries the consistency
    // terms itself.
    const LossFlags f = config.loss_flags;
    LossBreakdown loss;
    loss.log = loss_l1(base, sample.truth, grad_base, trace);
    Matrix g_inter;
    Matrix g_intra;
    loss.inter = loss_inter(base, sample.horizontal, sample.vertical, grad_base ? &g_inter : nullptr, trace);
    loss.intra = loss_intra(base, sample.truth, grad_base ? &g_intra : nullptr, trace);
    loss.total = loss.log + (f.inter ? loss.inter : 0.0) + (f.intra ? loss.intra : 0.0);
    if (grad_base && f.inter) kernels::active().axpy(1.0, g_inter.data(), grad_base->data(), grad_base->size());
    if (grad_base && f.intra) kernels::active().axpy(1.0, g_intra.data(), grad_base->data(), grad_base->size());
    return loss;
}

LossBreakdown Model::loss_and_grad(const Sample& sample, bool with_grad, KinkTrace* trace) {
    Impl& m = *impl_;
    m.forward(sample, m.work, trace);
    const std::size_t n = sample.truth.size();
    Matrix dbase(n, 4);
    Matrix dstacked(n, 4);
    const LossBreakdown loss = output_loss(sample, m.work.base, m.work.stacked, with_grad ? &dbase : nullptr,
                                           with_grad ? &dstacked : nullptr, trace);
    if (with_grad) m.backward(sample, m.work, std::move(dbase), std::move(dstacked));
    return loss;
}

} // namespace tsr::regressor
