#pragma once

// Independent reference implementations used only by the tests. None of them
// shares code with the library beyond the plain data types.

#include "tsr/core.hpp"
#include "tsr/metrics.hpp"
#include "tsr/random.hpp"
#include "tsr/synth.hpp"
#include "tsr/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Grid predicates

/// Per-slot membership: every (r, c) inside the bounding dimensions mapped to
/// the list of cell ids whose rectangle contains it.
inline std::map<std::pair<int, int>, std::vector<int>> slot_members(const tsr::TableGrid& g) {
    std::map<std::pair<int, int>, std::vector<int>> out;
    int rows = 0;
    int cols = 0;
    for (const auto& c : g.cells) {
        rows = std::max(rows, c.logical.r_e + 1);
        cols = std::max(cols, c.logical.c_e + 1);
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            auto& ids = out[{r, c}];
            for (const auto& cell : g.cells) {
                const auto& l = cell.logical;
                if (l.r_s <= r && r <= l.r_e && l.c_s <= c && c <= l.c_e) ids.push_back(cell.id);
            }
        }
    }
    return out;
}

/// Every ordered pair of distinct cells tested against the two predicates.
inline std::set<std::tuple<int, int, tsr::Direction>> brute_adjacency(const tsr::TableGrid& g) {
    std::set<std::tuple<int, int, tsr::Direction>> out;
    for (const auto& a : g.cells) {
        for (const auto& b : g.cells) {
            if (a.id == b.id) continue;
            const auto& i = a.logical;
            const auto& j = b.logical;
            const bool rows_meet = std::max(i.r_s, j.r_s) <= std::min(i.r_e, j.r_e);
            const bool cols_meet = std::max(i.c_s, j.c_s) <= std::min(i.c_e, j.c_e);
            if (rows_meet && i.c_s == j.c_e + 1) out.emplace(a.id, b.id, tsr::Direction::Horizontal);
            if (cols_meet && i.r_s == j.r_e + 1) out.emplace(a.id, b.id, tsr::Direction::Vertical);
        }
    }
    return out;
}

/// Cell lists equal after sorting by logical location, ignoring ids.
inline bool same_up_to_ids(const tsr::TableGrid& a, const tsr::TableGrid& b) {
    if (a.cells.size() != b.cells.size()) return false;
    auto key = [](const tsr::TableCell& c) {
        return std::tuple(c.logical.r_s, c.logical.c_s, c.logical.r_e, c.logical.c_e, c.content.value_or(""));
    };
    std::vector<decltype(key(a.cells[0]))> ka;
    std::vector<decltype(key(a.cells[0]))> kb;
    for (const auto& c : a.cells) ka.push_back(key(c));
    for (const auto& c : b.cells) kb.push_back(key(c));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

inline tsr::TableGrid grid_of(const std::vector<tsr::LogicalLocation>& locs) {
    tsr::TableGrid g;
    for (std::size_t i = 0; i < locs.size(); ++i) g.cells.push_back({static_cast<int>(i), locs[i], {}, {}});
    return g;
}

inline tsr::SpatialQuad box_quad(double x0, double y0, double x1, double y1) {
    return tsr::SpatialQuad({tsr::Point{x0, y0}, tsr::Point{x1, y0}, tsr::Point{x1, y1}, tsr::Point{x0, y1}});
}

/// Hole-free grids from the generator with up to 10 x 10 slots.
inline std::vector<tsr::TableGrid> criterion_grids(int n, std::uint64_t seed, double span_probability = 0.3) {
    tsr::synth::SynthConfig c;
    c.n_tables = n;
    c.rows_min = 1;
    c.rows_max = 10;
    c.cols_min = 1;
    c.cols_max = 10;
    c.span_probability = span_probability;
    c.seed = seed;
    return tsr::synth::generate(c);
}

// ---------------------------------------------------------------------------
// Exhaustive tree edit distance over Tai mappings.
//
// A mapping M between node sets is valid iff for all (a1, b1), (a2, b2) in M:
// a1 = a2 <=> b1 = b2, a1 is an ancestor of a2 <=> b1 is an ancestor of b2,
// and a1 precedes a2 in preorder <=> b1 precedes b2. The edit distance is the
// minimum over valid mappings of the mapped rename costs plus one for every
// unmapped node on either side.

struct Ancestry {
    std::vector<std::vector<bool>> anc;  // anc[a][b]: a is a proper ancestor of b

    explicit Ancestry(const tsr::metrics::Tree& t) : anc(t.size(), std::vector<bool>(t.size(), false)) {
        std::vector<int> parent(t.size(), -1);
        for (std::size_t p = 0; p < t.size(); ++p) {
            for (int c : t.nodes[p].children) parent[static_cast<std::size_t>(c)] = static_cast<int>(p);
        }
        for (std::size_t v = 0; v < t.size(); ++v) {
            for (int p = parent[v]; p >= 0; p = parent[static_cast<std::size_t>(p)]) anc[static_cast<std::size_t>(p)][v] = true;
        }
    }
};

inline double brute_ted(const tsr::metrics::Tree& a, const tsr::metrics::Tree& b, const tsr::metrics::RenameCost& rename) {
    const Ancestry aa(a);
    const Ancestry ab(b);
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    std::vector<int> map(n1, -1);
    std::vector<bool> used(n2, false);
    double best = static_cast<double>(n1 + n2);

    // Preorder position is the node index for trees stored in preorder.
    auto consistent = [&](std::size_t x, int y) {
        for (std::size_t p = 0; p < x; ++p) {
            if (map[p] < 0) continue;
            const auto q = static_cast<std::size_t>(map[p]);
            const auto yy = static_cast<std::size_t>(y);
            if (aa.anc[p][x] != ab.anc[q][yy]) return false;
            if (aa.anc[x][p] != ab.anc[yy][q]) return false;
            if ((p < x) != (q < yy)) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self, std::size_t x, double cost, std::size_t mapped) -> void {
        if (x == n1) {
            best = std::min(best, cost + static_cast<double>(n1 - mapped) + static_cast<double>(n2 - mapped));
            return;
        }
        map[x] = -1;
        self(self, x + 1, cost, mapped);
        for (std::size_t y = 0; y < n2; ++y) {
            if (used[y] || !consistent(x, static_cast<int>(y))) continue;
            used[y] = true;
            map[x] = static_cast<int>(y);
            self(self, x + 1, cost + rename(a.nodes[x], b.nodes[y]), mapped + 1);
            used[y] = false;
            map[x] = -1;
        }
    };
    rec(rec, 0, 0.0, 0);
    return best;
}

/// Random ordered tree of exactly n nodes in preorder with labels from {a,b,c}.
inline tsr::metrics::Tree random_tree(tsr::Rng& rng, int n) {
    tsr::metrics::Tree t;
    const char* labels[] = {"a", "b", "c"};
    t.nodes.push_back({labels[rng.uniform_int(0, 2)], 1, 1, "", {}});
    std::vector<int> path = {0};  // rightmost path from the root
    for (int k = 1; k < n; ++k) {
        const int keep = rng.uniform_int(1, static_cast<int>(path.size()));
        path.resize(static_cast<std::size_t>(keep));
        t.nodes[static_cast<std::size_t>(path.back())].children.push_back(k);
        t.nodes.push_back({labels[rng.uniform_int(0, 2)], 1, 1, "", {}});
        path.push_back(k);
    }
    return t;
}

inline double label_cost(const tsr::metrics::TreeNode& x, const tsr::metrics::TreeNode& y) {
    return x.tag == y.tag ? 0.0 : 1.0;
}

// ---------------------------------------------------------------------------
// BLEU written from the definition: modified precision per order against a
// single reference, geometric mean with equal weights, brevity penalty on
// corpus lengths.

inline double reference_bleu(const std::vector<std::vector<std::string>>& hyps,
                             const std::vector<std::vector<std::string>>& refs) {
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        long long clipped = 0;
        long long total = 0;
        for (std::size_t s = 0; s < hyps.size(); ++s) {
            std::map<std::vector<std::string>, long long> h;
            std::map<std::vector<std::string>, long long> r;
            for (std::size_t i = 0; i + n <= hyps[s].size(); ++i) {
                ++h[std::vector<std::string>(hyps[s].begin() + static_cast<long>(i), hyps[s].begin() + static_cast<long>(i + n))];
            }
            for (std::size_t i = 0; i + n <= refs[s].size(); ++i) {
                ++r[std::vector<std::string>(refs[s].begin() + static_cast<long>(i), refs[s].begin() + static_cast<long>(i + n))];
            }
            for (const auto& [gram, count] : h) {
                total += count;
                const auto it = r.find(gram);
                if (it != r.end()) clipped += std::min(count, it->second);
            }
        }
        if (clipped == 0 || total == 0) return 0.0;
        log_sum += 0.25 * std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    double c = 0.0;
    double r = 0.0;
    for (std::size_t s = 0; s < hyps.size(); ++s) {
        c += static_cast<double>(hyps[s].size());
        r += static_cast<double>(refs[s].size());
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum);
}

/// The 20 (prediction, reference) token sequences used by the BLEU checks:
/// a generated table's markup against a copy with a few token edits.
inline std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> bleu_pairs() {
    tsr::synth::SynthConfig c;
    c.rows_min = 2;
    c.rows_max = 6;
    c.cols_min = 2;
    c.cols_max = 6;
    c.span_probability = 0.3;
    c.seed = 20240;
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
    const std::vector<std::string> vocab = {"<tr>", "</tr>", "<td>", "</td>", "<td colspan=\"2\">", "<td rowspan=\"2\">"};
    for (int k = 0; k < 20; ++k) {
        const auto ref = tsr::to_markup(tsr::synth::generate_one(c, static_cast<std::uint64_t>(k))).token_strings();
        auto hyp = ref;
        tsr::Rng rng(77, static_cast<std::uint64_t>(k));
        const int edits = k % 5 == 0 ? 0 : rng.uniform_int(1, 6);
        for (int e = 0; e < edits; ++e) {
            const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(hyp.size()) - 1));
            const auto& tok = vocab[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(vocab.size()) - 1))];
            switch (rng.uniform_int(0, 2)) {
            case 0: hyp.erase(hyp.begin() + static_cast<long>(pos)); break;
            case 1: hyp.insert(hyp.begin() + static_cast<long>(pos), tok); break;
            default: hyp[pos] = tok; break;
            }
        }
        out.emplace_back(std::move(hyp), ref);
    }
    return out;
}

} // namespace oracle
