#include "tsr/error.hpp"
#include "tsr/metrics.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace tsr::metrics {

std::optional<int> CellMatching::gt_for(int pred_id) const noexcept {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), pred_id,
                               [](const MatchedPair& p, int id) { return p.pred_id < id; });
    if (it != pairs.end() && it->pred_id == pred_id) return it->gt_id;
    return std::nullopt;
}

CellMatching CellMatching::identity(const TableGrid& pred, const TableGrid& gt) {
    CellMatching m;
    const std::size_t n = std::min(pred.cells.size(), gt.cells.size());
    for (std::size_t k = 0; k < n; ++k) m.pairs.push_back({pred.cells[k].id, gt.cells[k].id, 1.0});
    for (std::size_t k = n; k < pred.cells.size(); ++k) m.unmatched_pred.push_back(pred.cells[k].id);
    for (std::size_t k = n; k < gt.cells.size(); ++k) m.unmatched_gt.push_back(gt.cells[k].id);
    std::sort(m.pairs.begin(), m.pairs.end(), [](const auto& a, const auto& b) { return a.pred_id < b.pred_id; });
    std::sort(m.unmatched_pred.begin(), m.unmatched_pred.end());
    std::sort(m.unmatched_gt.begin(), m.unmatched_gt.end());
    return m;
}

double iou(const Box& a, const Box& b) noexcept {
    const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

CellMatching match_cells(const TableGrid& pred, const TableGrid& gt, double threshold) {
    auto need_quads = [](const TableGrid& g, const char* side) {
        for (const TableCell& c : g.cells) {
            if (!c.quad) throw MissingQuad(std::string(side) + " cell " + std::to_string(c.id) + " has no quad");
        }
    };
    need_quads(pred, "pred");
    need_quads(gt, "gt");

    struct Candidate {
        double iou;
        int pred_id;
        int gt_id;
    };
    std::vector<Candidate> cands;
    for (const TableCell& p : pred.cells) {
        const Box pb = p.quad->bounding_box();
        for (const TableCell& g : gt.cells) {
            const double v = iou(pb, g.quad->bounding_box());
            if (v > 0.0 && v >= threshold) cands.push_back({v, p.id, g.id});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        return std::tie(a.pred_id, a.gt_id) < std::tie(b.pred_id, b.gt_id);
    });

    std::set<int> used_pred;
    std::set<int> used_gt;
    CellMatching m;
    for (const Candidate& c : cands) {
        if (used_pred.count(c.pred_id) || used_gt.count(c.gt_id)) continue;
        used_pred.insert(c.pred_id);
        used_gt.insert(c.gt_id);
        m.pairs.push_back({c.pred_id, c.gt_id, c.iou});
    }
    std::sort(m.pairs.begin(), m.pairs.end(), [](const auto& a, const auto& b) { return a.pred_id < b.pred_id; });
    for (const TableCell& p : pred.cells) {
        if (!used_pred.count(p.id)) m.unmatched_pred.push_back(p.id);
    }
    for (const TableCell& g : gt.cells) {
        if (!used_gt.count(g.id)) m.unmatched_gt.push_back(g.id);
    }
    std::sort(m.unmatched_pred.begin(), m.unmatched_pred.end());
    std::sort(m.unmatched_gt.begin(), m.unmatched_gt.end());
    return m;
}

PRF prf_from_counts(std::size_t true_pos, std::size_t pred_total, std::size_t gt_total) noexcept {
    if (pred_total == 0 && gt_total == 0) return {1.0, 1.0, 1.0};
    PRF r;
    r.precision = pred_total ? static_cast<double>(true_pos) / static_cast<double>(pred_total) : 0.0;
    r.recall = gt_total ? static_cast<double>(true_pos) / static_cast<double>(gt_total) : 0.0;
    const double s = r.precision + r.recall;
    r.f1 = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
    return r;
}

PRF detection_f1(const CellMatching& matching) noexcept {
    const std::size_t tp = matching.pairs.size();
    return prf_from_counts(tp, tp + matching.unmatched_pred.size(), tp + matching.unmatched_gt.size());
}

LogicalCounts& LogicalCounts::operator+=(const LogicalCounts& o) noexcept {
    gt_cells += o.gt_cells;
    all_ok += o.all_ok;
    row_ok += o.row_ok;
    col_ok += o.col_ok;
    span_cells += o.span_cells;
    span_ok += o.span_ok;
    return *this;
}

LogicalAccuracy LogicalCounts::ratios() const noexcept {
    LogicalAccuracy a;
    if (gt_cells == 0) {
        a.acc_all = a.acc_row = a.acc_col = 1.0;
    } else {
        const auto n = static_cast<double>(gt_cells);
        a.acc_all = static_cast<double>(all_ok) / n;
        a.acc_row = static_cast<double>(row_ok) / n;
        a.acc_col = static_cast<double>(col_ok) / n;
    }
    if (span_cells > 0) a.acc_span = static_cast<double>(span_ok) / static_cast<double>(span_cells);
    return a;
}

LogicalCounts logical_counts(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching) {
    LogicalCounts k;
    std::vector<const TableCell*> pred_for_gt(gt.cells.size(), nullptr);
    for (const MatchedPair& p : matching.pairs) {
        const auto pi = pred.index_of(p.pred_id);
        const auto gi = gt.index_of(p.gt_id);
        if (pi && gi) pred_for_gt[*gi] = &pred.cells[*pi];
    }
    for (std::size_t g = 0; g < gt.cells.size(); ++g) {
        const LogicalLocation& truth = gt.cells[g].logical;
        const bool spanning = truth.spanning();
        ++k.gt_cells;
        if (spanning) ++k.span_cells;
        const TableCell* p = pred_for_gt[g];
        if (!p) continue;
        const LogicalLocation& l = p->logical;
        const bool row = l.r_s == truth.r_s && l.r_e == truth.r_e;
        const bool col = l.c_s == truth.c_s && l.c_e == truth.c_e;
        k.row_ok += row;
        k.col_ok += col;
        k.all_ok += row && col;
        if (spanning) k.span_ok += row && col;
    }
    return k;
}

LogicalAccuracy logical_accuracy(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching) {
    return logical_counts(pred, gt, matching).ratios();
}

AdjacencyCounts& AdjacencyCounts::operator+=(const AdjacencyCounts& o) noexcept {
    true_pos += o.true_pos;
    pred_total += o.pred_total;
    gt_total += o.gt_total;
    return *this;
}

AdjacencyCounts adjacency_counts(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching) {
    const AdjacencySets gt_sets = adjacency_pairs(gt);
    const AdjacencySets pred_sets = adjacency_pairs(pred);

    using Triplet = std::tuple<long long, long long, int>;
    std::set<Triplet> truth;
    for (const auto* v : {&gt_sets.horizontal, &gt_sets.vertical}) {
        for (const AdjacencyPair& p : *v) truth.emplace(p.i, p.j, static_cast<int>(p.direction));
    }
    // Unmatched predicted cells map to ids no gt cell can carry, so every
    // relation touching them is a false positive.
    auto to_gt = [&](int pred_id) -> long long {
        if (auto g = matching.gt_for(pred_id)) return *g;
        return (1LL << 40) + pred_id;
    };

    AdjacencyCounts c;
    c.gt_total = truth.size();
    for (const auto* v : {&pred_sets.horizontal, &pred_sets.vertical}) {
        for (const AdjacencyPair& p : *v) {
            ++c.pred_total;
            if (truth.count({to_gt(p.i), to_gt(p.j), static_cast<int>(p.direction)})) ++c.true_pos;
        }
    }
    return c;
}

PRF adjacency_f1(const TableGrid& pred, const TableGrid& gt, const CellMatching& matching) {
    return adjacency_counts(pred, gt, matching).ratios();
}

} // namespace tsr::metrics
