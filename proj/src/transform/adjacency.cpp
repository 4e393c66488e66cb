#include "tsr/error.hpp"
#include "tsr/transform.hpp"

#include <algorithm>

namespace tsr {

const char* to_string(Direction d) noexcept {
    switch (d) {
    case Direction::Horizontal: return "horizontal";
    case Direction::Vertical: return "vertical";
    case Direction::None: break;
    }
    return "none";
}

namespace {

// Two distinct cells in neighbouring slots are always immediate neighbours:
// the left one must end at the shared boundary and the right one start after
// it, and both cover the scanned row, so their row spans intersect.
void collect(const Occupancy& occ, AdjacencySets& out) {
    for (int r = 0; r < occ.rows(); ++r) {
        for (int c = 0; c + 1 < occ.cols(); ++c) {
            const int left = occ.at(r, c);
            const int right = occ.at(r, c + 1);
            if (left != Occupancy::kEmpty && right != Occupancy::kEmpty && left != right) {
                out.horizontal.push_back({right, left, Direction::Horizontal});
            }
        }
    }
    for (int r = 0; r + 1 < occ.rows(); ++r) {
        for (int c = 0; c < occ.cols(); ++c) {
            const int above = occ.at(r, c);
            const int below = occ.at(r + 1, c);
            if (above != Occupancy::kEmpty && below != Occupancy::kEmpty && above != below) {
                out.vertical.push_back({below, above, Direction::Vertical});
            }
        }
    }
    for (auto* v : {&out.horizontal, &out.vertical}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
}

} // namespace

AdjacencySets adjacency_pairs(const TableGrid& grid) {
    require_valid(grid);
    AdjacencySets sets;
    collect(occupancy(grid), sets);
    return sets;
}

AdjacencyMatrix adjacency_matrix(const TableGrid& grid) {
    const AdjacencySets sets = adjacency_pairs(grid);
    AdjacencyMatrix m;
    m.n = grid.cells.size();
    m.labels.assign(m.n * m.n, Direction::None);
    auto mark = [&](const AdjacencyPair& p) {
        const std::size_t a = *grid.index_of(p.i);
        const std::size_t b = *grid.index_of(p.j);
        m.labels[a * m.n + b] = p.direction;
        m.labels[b * m.n + a] = p.direction;
    };
    for (const auto& p : sets.horizontal) mark(p);
    for (const auto& p : sets.vertical) mark(p);
    return m;
}

} // namespace tsr
