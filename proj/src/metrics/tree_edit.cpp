#include "tsr/error.hpp"
#include "tsr/metrics.hpp"

#include <algorithm>
#include <vector>

namespace tsr::metrics {

namespace {

// Postorder view of a tree: 1-based node numbers, leftmost-leaf table and
// keyroots, as used by the Zhang-Shasha recursion.
struct Postorder {
    std::vector<const TreeNode*> node;  // node[k], k in 1..n
    std::vector<int> leftmost;          // leftmost[k]
    std::vector<int> keyroots;          // ascending

    explicit Postorder(const Tree& t) {
        node.push_back(nullptr);
        leftmost.push_back(0);
        if (t.nodes.empty()) return;
        visit(t, 0);
        const int n = static_cast<int>(node.size()) - 1;
        std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
        for (int k = n; k >= 1; --k) {
            if (!seen[leftmost[k]]) {
                keyroots.push_back(k);
                seen[leftmost[k]] = true;
            }
        }
        std::reverse(keyroots.begin(), keyroots.end());
    }

    int visit(const Tree& t, int idx) {
        int first_leaf = -1;
        for (int child : t.nodes[idx].children) {
            const int l = visit(t, child);
            if (first_leaf < 0) first_leaf = l;
        }
        node.push_back(&t.nodes[idx]);
        const int me = static_cast<int>(node.size()) - 1;
        leftmost.push_back(first_leaf < 0 ? me : first_leaf);
        return leftmost.back();
    }

    [[nodiscard]] int size() const noexcept { return static_cast<int>(node.size()) - 1; }
};

} // namespace

double tree_edit_distance(const Tree& a, const Tree& b, const RenameCost& rename) {
    const Postorder ta(a);
    const Postorder tb(b);
    const int n = ta.size();
    const int m = tb.size();
    if (n == 0) return m;
    if (m == 0) return n;

    std::vector<double> td(static_cast<std::size_t>(n + 1) * (m + 1), 0.0);
    auto tree_at = [&](int i, int j) -> double& { return td[static_cast<std::size_t>(i) * (m + 1) + j]; };
    std::vector<double> fd(static_cast<std::size_t>(n + 2) * (m + 2), 0.0);

    for (int i : ta.keyroots) {
        for (int j : tb.keyroots) {
            const int li = ta.leftmost[i];
            const int lj = tb.leftmost[j];
            // Forest distances indexed relative to (li - 1, lj - 1).
            const int cols = j - lj + 2;
            auto forest = [&](int x, int y) -> double& {
                return fd[static_cast<std::size_t>(x - li + 1) * cols + (y - lj + 1)];
            };
            forest(li - 1, lj - 1) = 0.0;
            for (int x = li; x <= i; ++x) forest(x, lj - 1) = forest(x - 1, lj - 1) + 1.0;
            for (int y = lj; y <= j; ++y) forest(li - 1, y) = forest(li - 1, y - 1) + 1.0;
            for (int x = li; x <= i; ++x) {
                for (int y = lj; y <= j; ++y) {
                    const double del = forest(x - 1, y) + 1.0;
                    const double ins = forest(x, y - 1) + 1.0;
                    if (ta.leftmost[x] == li && tb.leftmost[y] == lj) {
                        const double ren = forest(x - 1, y - 1) + rename(*ta.node[x], *tb.node[y]);
                        forest(x, y) = std::min({del, ins, ren});
                        tree_at(x, y) = forest(x, y);
                    } else {
                        const double sub = forest(ta.leftmost[x] - 1, tb.leftmost[y] - 1) + tree_at(x, y);
                        forest(x, y) = std::min({del, ins, sub});
                    }
                }
            }
        }
    }
    return tree_at(n, m);
}

Tree markup_tree(const MarkupSequence& seq) {
    check_markup_grammar(seq);
    Tree t;
    int current_row = -1;
    int current_cell = -1;
    for (const MarkupToken& tok : seq.tokens) {
        switch (tok.kind) {
        case TokenKind::TableOpen:
            t.nodes.push_back({"table", 1, 1, {}, {}});
            break;
        case TokenKind::RowOpen:
            t.nodes.push_back({"tr", 1, 1, {}, {}});
            current_row = static_cast<int>(t.nodes.size()) - 1;
            t.nodes[0].children.push_back(current_row);
            break;
        case TokenKind::CellOpen:
            t.nodes.push_back({"td", tok.rowspan, tok.colspan, {}, {}});
            current_cell = static_cast<int>(t.nodes.size()) - 1;
            t.nodes[current_row].children.push_back(current_cell);
            break;
        case TokenKind::Text:
            t.nodes[current_cell].text += tok.text;
            break;
        default:
            break;
        }
    }
    return t;
}

double normalized_edit_distance(const std::string& a, const std::string& b) noexcept {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 0.0;
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return std::min(1.0, static_cast<double>(prev[b.size()]) / static_cast<double>(longest));
}

double table_rename_cost(const TreeNode& a, const TreeNode& b, ContentMode mode) noexcept {
    if (a.tag != b.tag || a.rowspan != b.rowspan || a.colspan != b.colspan) return 1.0;
    if (mode == ContentMode::WithContent && a.tag == "td") return normalized_edit_distance(a.text, b.text);
    return 0.0;
}

double teds(const MarkupSequence& pred, const MarkupSequence& gt, ContentMode mode) {
    const Tree tp = markup_tree(pred);
    const Tree tg = markup_tree(gt);
    const double dist = tree_edit_distance(tp, tg, [mode](const TreeNode& a, const TreeNode& b) {
        return table_rename_cost(a, b, mode);
    });
    const double denom = static_cast<double>(std::max(tp.size(), tg.size()));
    return std::clamp(1.0 - dist / denom, 0.0, 1.0);
}

} // namespace tsr::metrics
