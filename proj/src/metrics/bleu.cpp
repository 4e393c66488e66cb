#include "tsr/error.hpp"
#include "tsr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace tsr::metrics {

namespace {

constexpr int kMaxOrder = 4;

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, int n) {
    std::map<NGram, std::size_t> counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

} // namespace

double corpus_bleu(const std::vector<std::vector<std::string>>& preds, const std::vector<std::vector<std::string>>& refs) {
    if (preds.size() != refs.size()) {
        throw LengthMismatch("corpus_bleu: " + std::to_string(preds.size()) + " predictions vs " +
                             std::to_string(refs.size()) + " references");
    }
    std::array<std::size_t, kMaxOrder> clipped{};
    std::array<std::size_t, kMaxOrder> total{};
    std::size_t pred_len = 0;
    std::size_t ref_len = 0;
    for (std::size_t s = 0; s < preds.size(); ++s) {
        pred_len += preds[s].size();
        ref_len += refs[s].size();
        for (int n = 1; n <= kMaxOrder; ++n) {
            const auto pc = count_ngrams(preds[s], n);
            const auto rc = count_ngrams(refs[s], n);
            for (const auto& [gram, c] : pc) {
                total[n - 1] += c;
                if (auto it = rc.find(gram); it != rc.end()) clipped[n - 1] += std::min(c, it->second);
            }
        }
    }
    if (pred_len == 0) return 0.0;
    double log_sum = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        if (clipped[n] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped[n]) / static_cast<double>(total[n]));
    }
    const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(pred_len)));
    return bp * std::exp(log_sum / kMaxOrder);
}

double bleu(const MarkupSequence& pred, const MarkupSequence& gt) {
    return corpus_bleu({pred.token_strings()}, {gt.token_strings()});
}

} // namespace tsr::metrics
