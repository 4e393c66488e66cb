#pragma once

// Cascading logical-location regressor: geometric cell features with corner
// position embeddings, a self-attention base regressor, a stacking regressor
// conditioned on the base estimate, inter-/intra-cell consistency losses and
// a hand-written reverse pass over all of it.

#include "tsr/core.hpp"
#include "tsr/tensor.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsr::regressor {

struct LossFlags {
    bool inter = true;
    bool intra = true;
};

struct RegressorConfig {
    int d = 64;
    int heads = 4;
    int layers_base = 3;
    int layers_stack = 3;
    int ffn = 0;          // feed-forward width; 0 means 2 * d
    bool cascade = true;  // false: one encoder of layers_base + layers_stack layers

    int epochs = 100;
    double lr = 1e-3;
    // Staged decay: the rate is multiplied by decay_factor once the epoch
    // reaches each fraction of `epochs` (70% and 90% by default).
    std::vector<double> decay_at = {0.7, 0.9};
    double decay_factor = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 1.0;  // global L2 norm; 0 disables

    LossFlags loss_flags;
    std::uint64_t seed = 0;

    [[nodiscard]] int ffn_width() const noexcept { return ffn > 0 ? ffn : 2 * d; }
    [[nodiscard]] double lr_at(int epoch) const noexcept;
    /// Throws ConfigError.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Parameters

struct TensorInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
};

/// Flat storage of every learnable tensor plus a matching gradient buffer.
class ParamStore {
public:
    using Handle = std::size_t;

    Handle add(std::string name, std::size_t rows, std::size_t cols);

    [[nodiscard]] MatView value(Handle h) noexcept;
    [[nodiscard]] ConstMatView value(Handle h) const noexcept;
    [[nodiscard]] MatView grad(Handle h) noexcept;

    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> grads() noexcept { return grads_; }
    [[nodiscard]] std::span<const double> grads() const noexcept { return grads_; }
    [[nodiscard]] const std::vector<TensorInfo>& tensors() const noexcept { return tensors_; }
    [[nodiscard]] std::optional<Handle> find(const std::string& name) const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    void zero_grad() noexcept;

private:
    std::vector<TensorInfo> tensors_;
    std::vector<double> values_;
    std::vector<double> grads_;
};

// ---------------------------------------------------------------------------
// Feature construction

/// Sinusoidal 2-D embedding: the first d/2 entries encode x, the rest y, each
/// as interleaved (sin, cos) pairs with angle 2*pi*v / 10000^(4k/d).
/// Requires x, y in [0, 1] (DomainError) and d divisible by 4.
[[nodiscard]] std::vector<double> position_embedding(double x, double y, int d);

inline constexpr std::size_t kDescriptorSize = 12;

/// Per-cell inputs in normalised image coordinates.
struct CellGeometry {
    Matrix descriptors;  // N x 12: centroid, box width/height, 8 corner coords
    Matrix corners;      // N x 8: (x, y) of TL, TR, BR, BL
    [[nodiscard]] std::size_t size() const noexcept { return descriptors.rows(); }
};

/// Normalises by the image size (or by the largest corner coordinate when the
/// grid has none). Throws MissingQuad and EmptyInput.
[[nodiscard]] CellGeometry cell_geometry(const TableGrid& grid);

// ---------------------------------------------------------------------------
// Losses. Predictions are N x 4 in (r_s, r_e, c_s, c_e) column order.

struct IndexPair {
    std::size_t i = 0;  // right of / under j
    std::size_t j = 0;
};

/// Signs of every hinge, absolute-value and ReLU argument seen by a forward
/// pass; used to keep finite differences away from kinks.
using KinkTrace = std::vector<std::int8_t>;

/// sum over horizontal pairs of max(c_e(j) - c_s(i) + 1, 0) plus sum over
/// vertical pairs of max(r_e(j) - r_s(i) + 1, 0). Throws IndexError.
double loss_inter(ConstMatView pred, std::span<const IndexPair> horizontal, std::span<const IndexPair> vertical,
                  Matrix* grad = nullptr, KinkTrace* trace = nullptr);

/// Span-consistency penalty over multi-row and multi-column ground-truth
/// cells. Throws LengthMismatch.
double loss_intra(ConstMatView pred, std::span<const LogicalLocation> truth, Matrix* grad = nullptr,
                  KinkTrace* trace = nullptr);

/// (1/N) * sum_i |pred_i - l_i|_1; the logical loss of one regressor output.
/// Gradients accumulate into `grad`. Throws LengthMismatch.
double loss_l1(ConstMatView pred, std::span<const LogicalLocation> truth, Matrix* grad = nullptr,
               KinkTrace* trace = nullptr);

/// (1/N) * sum_i (|base_i - l_i|_1 + |stacked_i - l_i|_1). Throws LengthMismatch.
double loss_log(ConstMatView base, ConstMatView stacked, std::span<const LogicalLocation> truth,
                Matrix* grad_base = nullptr, Matrix* grad_stacked = nullptr, KinkTrace* trace = nullptr);

struct LossBreakdown {
    double log = 0.0;
    double inter = 0.0;
    double intra = 0.0;
    double total = 0.0;  // log + enabled consistency terms
};

/// Consistency terms are evaluated on the stacked output only; disabled terms
/// are still reported but do not enter `total` or the gradients.
LossBreakdown total_loss(ConstMatView base, ConstMatView stacked, std::span<const LogicalLocation> truth,
                         std::span<const IndexPair> horizontal, std::span<const IndexPair> vertical, LossFlags flags,
                         Matrix* grad_base = nullptr, Matrix* grad_stacked = nullptr, KinkTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Model

/// Training/evaluation unit precomputed from a grid with quads.
struct Sample {
    CellGeometry geometry;
    std::vector<Matrix> corner_pe;  // 4 matrices N x d
    std::vector<LogicalLocation> truth;
    std::vector<IndexPair> horizontal;
    std::vector<IndexPair> vertical;
};

/// Geometry and corner embeddings only; logical locations are not read.
/// Throws MissingQuad and EmptyInput.
[[nodiscard]] Sample make_inputs(const TableGrid& grid, int d);

/// make_inputs plus ground truth and adjacency pairs.
/// Throws MissingQuad, EmptyInput, OverlapError and InvalidGrid.
[[nodiscard]] Sample make_sample(const TableGrid& grid, int d);

struct Prediction {
    Matrix base;     // N x 4
    Matrix stacked;  // N x 4 (equals base for a non-cascade model)
};

class Model {
public:
    enum class Stack { Base, Stacking };

    explicit Model(const RegressorConfig& config);
    ~Model();
    Model(Model&&) noexcept;
    Model& operator=(Model&&) noexcept;
    Model(const Model&);
    Model& operator=(const Model&);

    [[nodiscard]] const RegressorConfig& config() const noexcept;
    [[nodiscard]] ParamStore& params() noexcept;
    [[nodiscard]] const ParamStore& params() const noexcept;

    /// h = stem(descriptor) + sum_k w_k * (corner_stem(p_k) + PE(p_k)).
    [[nodiscard]] Matrix build_cell_features(const Sample& sample) const;

    /// Self-attention stack over all cells. When `attention` is given it
    /// receives one N x N row-stochastic matrix per layer and head.
    [[nodiscard]] Matrix encode(const Matrix& h, Stack stack, std::vector<Matrix>* attention = nullptr) const;

    /// ReLU(h~ * W + b).
    [[nodiscard]] Matrix base_regress(const Matrix& encoded) const;

    /// F_s(l^ * W_s + h~) with its own encoder and head. Cascade models only.
    [[nodiscard]] Matrix stack_regress(const Matrix& encoded, const Matrix& base) const;

    [[nodiscard]] Prediction predict(const Sample& sample, KinkTrace* trace = nullptr) const;

    /// Loss of the given outputs as composed by loss_and_grad; gradients are
    /// with respect to the base and stacked outputs.
    LossBreakdown output_loss(const Sample& sample, ConstMatView base, ConstMatView stacked, Matrix* grad_base,
                              Matrix* grad_stacked, KinkTrace* trace = nullptr) const;

    /// Forward and reverse pass. Gradients are accumulated into params().grads().
    LossBreakdown loss_and_grad(const Sample& sample, bool with_grad, KinkTrace* trace = nullptr);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Training and inference

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double loss_log = 0.0;    // means over training tables
    double loss_inter = 0.0;
    double loss_intra = 0.0;
    std::optional<double> heldout_acc_all;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Per-table Adam steps with the staged schedule; deterministic given
/// config.seed. Throws ConfigError, EmptyInput and NonFiniteLoss.
[[nodiscard]] TrainResult train(const std::vector<TableGrid>& dataset, const std::vector<TableGrid>& heldout,
                                const RegressorConfig& config, const EpochCallback& on_epoch = {});

struct InferResult {
    std::vector<LogicalLocation> locations;
    Matrix raw;  // stacked output before rounding
};

/// Rounds half away from zero, clamps at 0 and repairs inverted intervals.
[[nodiscard]] LogicalLocation round_location(std::span<const double, 4> raw) noexcept;

[[nodiscard]] InferResult infer(const Model& model, const TableGrid& grid);

/// Copy of `grid` with logical locations replaced by the model's predictions.
[[nodiscard]] TableGrid infer_grid(const Model& model, const TableGrid& grid);

/// Fraction of cells whose rounded prediction equals the ground truth.
[[nodiscard]] double heldout_accuracy(const Model& model, const std::vector<Sample>& samples);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history, const RegressorConfig& config);

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0;  // parameters whose +/- epsilon probes cross a kink
};

/// Central differences on `n_params` randomly chosen parameters. Relative
/// error is |a - n| / max(|a|, |n|, 1e-8).
[[nodiscard]] GradCheckResult grad_check(Model& model, const Sample& sample, double epsilon, std::size_t n_params,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints: "TSRP" magic, u32 version, u32 config-JSON length + JSON,
// u32 tensor count, then per tensor u32 name length + name, u32 rows,
// u32 cols and rows*cols little-endian f64.

void save_checkpoint(const Model& model, std::ostream& out);
[[nodiscard]] Model load_checkpoint(std::istream& in);
void save_checkpoint_file(const Model& model, const std::string& path);
[[nodiscard]] Model load_checkpoint_file(const std::string& path);

[[nodiscard]] std::string config_to_json(const RegressorConfig& config);
[[nodiscard]] RegressorConfig config_from_json(const std::string& json);

} // namespace tsr::regressor
