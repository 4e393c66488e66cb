#include "tsr/error.hpp"
#include "tsr/metrics.hpp"

namespace tsr::metrics {

MetricReport evaluate(const std::vector<TableGrid>& pred, const std::vector<TableGrid>& gt, const EvalOptions& options) {
    if (pred.size() != gt.size()) {
        throw LengthMismatch("prediction has " + std::to_string(pred.size()) + " tables, ground truth has " +
                             std::to_string(gt.size()));
    }

    MetricReport report;
    std::size_t det_tp = 0;
    std::size_t det_pred = 0;
    std::size_t det_gt = 0;
    LogicalCounts logical;
    AdjacencyCounts adjacency;
    std::vector<std::vector<std::string>> bleu_pred;
    std::vector<std::vector<std::string>> bleu_ref;
    double teds_sum = 0.0;

    for (std::size_t s = 0; s < pred.size(); ++s) {
        const std::string where = "line " + std::to_string(s + 1) + ": ";
        try {
            SampleMetrics m;
            if (options.spatial) {
                const CellMatching matching = match_cells(pred[s], gt[s], options.iou_threshold);
                m.detection = detection_f1(matching);
                det_tp += matching.pairs.size();
                det_pred += matching.pairs.size() + matching.unmatched_pred.size();
                det_gt += matching.pairs.size() + matching.unmatched_gt.size();

                const LogicalCounts lc = logical_counts(pred[s], gt[s], matching);
                m.logical = lc.ratios();
                logical += lc;

                const AdjacencyCounts ac = adjacency_counts(pred[s], gt[s], matching);
                m.adjacency = ac.ratios();
                adjacency += ac;
            }
            const MarkupSequence pm = to_markup(pred[s], options.teds_mode);
            const MarkupSequence gm = to_markup(gt[s], options.teds_mode);
            m.teds = teds(pm, gm, options.teds_mode);
            teds_sum += m.teds;

            const MarkupSequence ps = to_markup(pred[s]);
            const MarkupSequence gs = to_markup(gt[s]);
            m.bleu = bleu(ps, gs);
            bleu_pred.push_back(ps.token_strings());
            bleu_ref.push_back(gs.token_strings());
            report.samples.push_back(std::move(m));
        } catch (const MissingQuad& e) {
            throw MissingQuad(where + e.what());
        } catch (const InvalidGrid& e) {
            throw InvalidGrid(where + e.what());
        } catch (const OverlapError& e) {
            throw InvalidGrid(where + e.what());
        }
    }

    if (options.spatial) {
        report.detection = prf_from_counts(det_tp, det_pred, det_gt);
        report.logical = logical.ratios();
        report.adjacency = adjacency.ratios();
    }
    report.teds = pred.empty() ? 1.0 : teds_sum / static_cast<double>(pred.size());
    report.bleu = pred.empty() ? 1.0 : corpus_bleu(bleu_pred, bleu_ref);
    return report;
}

} // namespace tsr::metrics
