#pragma once

#include "tsr/core.hpp"
#include "tsr/transform.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tsr::metrics {

struct MatchedPair {
    int pred_id = 0;
    int gt_id = 0;
    double iou = 0.0;
};

struct CellMatching {
    std::vector<MatchedPair> pairs;  // sorted by pred_id
    std::vector<int> unmatched_pred; // sorted
    std::vector<int> unmatched_gt;   // sorted

    [[nodiscard]] std::optional<int> gt_for(int pred_id) const noexcept;

    /// Matches cells by position in the two grids; for aligned predictions
    /// (e.g. regressor output over ground-truth quads).
    [[nodiscard]] static CellMatching identity(const TableGrid& pred, const TableGrid& gt);
};

[[nodiscard]] double iou(const Box& a, const Box& b) noexcept;

/// Greedy one-to-one matching by descending axis-aligned-box IoU, ties broken
/// by (pred_id, gt_id). Throws MissingQuad.
[[nodiscard]] CellMatching match_cells(const TableGrid& pred, const TableGrid& gt, double threshold = 0.5);

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// F1 from raw counts; empty-both is a perfect score, empty-one-side is zero.
[[nodiscard]] PRF prf_from_counts(std::size_t true_pos, std::size_t pred_total, std::size_t gt_total) noexcept;

[[nodiscard]] PRF detection_f1(const CellMatching& matching) noexcept;

struct LogicalAccuracy {
    double acc_all = 0.0;
    double acc_row = 0.0;
    double acc_col = 0.0;
    std::optional<double> acc_span;  // absent when gt has no spanning cells
};

/// Raw tallies so corpus aggregates can be formed before taking ratios.
struct LogicalCounts {
    std::size_t gt_cells = 0;
    std::size_t all_ok = 0;
    std::size_t row_ok = 0;
    std::size_t col_ok = 0;
    std::size_t span_cells = 0;
    std::size_t span_ok = 0;

    LogicalCounts& operator+=(const LogicalCounts& o) noexcept;
    [[nodiscard]] LogicalAccuracy ratios() const noexcept;
};

[[nodiscard]] LogicalCounts logical_counts(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching);
[[nodiscard]] LogicalAccuracy logical_accuracy(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching);

struct AdjacencyCounts {
    std::size_t true_pos = 0;
    std::size_t pred_total = 0;
    std::size_t gt_total = 0;

    AdjacencyCounts& operator+=(const AdjacencyCounts& o) noexcept;
    [[nodiscard]] PRF ratios() const noexcept { return prf_from_counts(true_pos, pred_total, gt_total); }
};

[[nodiscard]] AdjacencyCounts adjacency_counts(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching);
[[nodiscard]] PRF adjacency_f1(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching);

// ---------------------------------------------------------------------------
// Tree edit distance

/// Ordered labelled tree in flat preorder form.
struct TreeNode {
    std::string tag;
    int rowspan = 1;
    int colspan = 1;
    std::string text;
    std::vector<int> children;  // indices into Tree::nodes
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root, preorder
    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

using RenameCost = std::function<double(const TreeNode&, const TreeNode&)>;

/// Exact ordered tree edit distance (Zhang-Shasha keyroot recursion) with
/// unit insert/delete costs.
[[nodiscard]] double tree_edit_distance(const Tree& a, const Tree& b, const RenameCost& rename);

/// table -> tr -> td tree of a markup sequence; throws ParseError.
[[nodiscard]] Tree markup_tree(const MarkupSequence& seq);

/// 0 for identical tag and spans, 1 otherwise; with content, equal-structure
/// cells cost the normalised Levenshtein distance of their text.
[[nodiscard]] double table_rename_cost(const TreeNode& a, const TreeNode& b, ContentMode mode) noexcept;

[[nodiscard]] double normalized_edit_distance(const std::string& a, const std::string& b) noexcept;

[[nodiscard]] double teds(const MarkupSequence& pred, const MarkupSequence& gt, ContentMode mode = ContentMode::StructureOnly);

// ---------------------------------------------------------------------------
// BLEU

/// Corpus BLEU-4, uniform weights, no smoothing, brevity penalty on summed
/// lengths. A zero clipped count at any order yields 0.
[[nodiscard]] double corpus_bleu(const std::vector<std::vector<std::string>>& preds,
                                 const std::vector<std::vector<std::string>>& refs);

[[nodiscard]] double bleu(const MarkupSequence& pred, const MarkupSequence& gt);

// ---------------------------------------------------------------------------
// Reports

struct SampleMetrics {
    std::optional<PRF> detection;
    std::optional<LogicalAccuracy> logical;
    std::optional<PRF> adjacency;
    double teds = 0.0;
    double bleu = 0.0;
};

struct MetricReport {
    std::vector<SampleMetrics> samples;
    std::optional<PRF> detection;
    std::optional<LogicalAccuracy> logical;
    std::optional<PRF> adjacency;
    double teds = 0.0;  // mean over samples
    double bleu = 0.0;  // corpus level
};

struct EvalOptions {
    double iou_threshold = 0.5;
    ContentMode teds_mode = ContentMode::StructureOnly;
    bool spatial = true;  // detection/logical/adjacency need quads
};

/// Pred and gt are aligned by position. Throws LengthMismatch, MissingQuad
/// (message names the 1-based sample) and InvalidGrid.
[[nodiscard]] MetricReport evaluate(const std::vector<TableGrid>& pred, const std::vector<TableGrid>& gt,
                                    const EvalOptions& options = {});

} // namespace tsr::metrics
