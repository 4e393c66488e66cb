#include "tsr/core.hpp"

#include "tsr/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace tsr {

double shoelace_area(const std::array<Point, 4>& corners) noexcept {
    double twice = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const Point& a = corners[k];
        const Point& b = corners[(k + 1) % 4];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

SpatialQuad::SpatialQuad(const std::array<Point, 4>& corners) : corners_(corners) {
    for (const Point& p : corners_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0) {
            throw DomainError("quad corner must be finite and non-negative");
        }
    }
    if (!(shoelace_area(corners_) > 0.0)) {
        throw DomainError("quad is degenerate or not ordered TL, TR, BR, BL");
    }
}

Point SpatialQuad::centroid() const noexcept {
    Point c;
    for (const Point& p : corners_) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x *= 0.25;
    c.y *= 0.25;
    return c;
}

double SpatialQuad::signed_area() const noexcept { return shoelace_area(corners_); }

Box SpatialQuad::bounding_box() const noexcept {
    Box b{corners_[0].x, corners_[0].y, corners_[0].x, corners_[0].y};
    for (const Point& p : corners_) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    return b;
}

bool TableGrid::has_quads() const noexcept {
    return std::all_of(cells.begin(), cells.end(), [](const TableCell& c) { return c.quad.has_value(); });
}

std::optional<std::size_t> TableGrid::index_of(int id) const noexcept {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].id == id) return i;
    }
    return std::nullopt;
}

GridDims dimensions(const TableGrid& grid) noexcept {
    GridDims dims;
    for (const TableCell& c : grid.cells) {
        dims.rows = std::max(dims.rows, c.logical.r_e + 1);
        dims.cols = std::max(dims.cols, c.logical.c_e + 1);
    }
    return dims;
}

ValidationReport validate(const TableGrid& grid) {
    ValidationReport report;

    std::set<int> seen;
    std::set<int> dup;
    for (const TableCell& c : grid.cells) {
        if (!seen.insert(c.id).second) dup.insert(c.id);
        if (!c.logical.well_formed()) report.out_of_bounds.push_back(c.id);
    }
    report.duplicate_ids.assign(dup.begin(), dup.end());

    const auto& cells = grid.cells;
    for (std::size_t a = 0; a < cells.size(); ++a) {
        if (!cells[a].logical.well_formed()) continue;
        for (std::size_t b = a + 1; b < cells.size(); ++b) {
            if (!cells[b].logical.well_formed()) continue;
            if (cells[a].logical.intersects(cells[b].logical)) {
                report.overlaps.emplace_back(std::min(cells[a].id, cells[b].id), std::max(cells[a].id, cells[b].id));
            }
        }
    }
    std::sort(report.overlaps.begin(), report.overlaps.end());

    GridDims dims;
    for (const TableCell& c : cells) {
        if (!c.logical.well_formed()) continue;
        dims.rows = std::max(dims.rows, c.logical.r_e + 1);
        dims.cols = std::max(dims.cols, c.logical.c_e + 1);
    }
    std::vector<char> covered(static_cast<std::size_t>(dims.rows) * dims.cols, 0);
    for (const TableCell& c : cells) {
        if (!c.logical.well_formed()) continue;
        for (int r = c.logical.r_s; r <= c.logical.r_e; ++r) {
            for (int k = c.logical.c_s; k <= c.logical.c_e; ++k) {
                covered[static_cast<std::size_t>(r) * dims.cols + k] = 1;
            }
        }
    }
    for (int r = 0; r < dims.rows; ++r) {
        for (int k = 0; k < dims.cols; ++k) {
            if (!covered[static_cast<std::size_t>(r) * dims.cols + k]) report.holes.push_back({r, k});
        }
    }

    report.valid = report.overlaps.empty() && report.out_of_bounds.empty() && report.duplicate_ids.empty();
    return report;
}

Occupancy occupancy(const TableGrid& grid) {
    for (const TableCell& c : grid.cells) {
        if (!c.logical.well_formed()) {
            throw InvalidGrid("cell " + std::to_string(c.id) + " has a malformed logical location");
        }
    }
    const GridDims dims = dimensions(grid);
    Occupancy occ(dims.rows, dims.cols);
    for (const TableCell& c : grid.cells) {
        for (int r = c.logical.r_s; r <= c.logical.r_e; ++r) {
            for (int k = c.logical.c_s; k <= c.logical.c_e; ++k) {
                int& slot = occ.at(r, k);
                if (slot != Occupancy::kEmpty) {
                    throw OverlapError("cells " + std::to_string(slot) + " and " + std::to_string(c.id) +
                                       " both claim slot (" + std::to_string(r) + ", " + std::to_string(k) + ")");
                }
                slot = c.id;
            }
        }
    }
    return occ;
}

std::string describe(const ValidationReport& report) {
    std::ostringstream os;
    if (report.valid) {
        os << "valid";
        if (!report.holes.empty()) os << " (" << report.holes.size() << " holes)";
        return os.str();
    }
    os << "invalid:";
    for (const auto& [a, b] : report.overlaps) os << " overlap(" << a << "," << b << ")";
    for (int id : report.out_of_bounds) os << " malformed(" << id << ")";
    for (int id : report.duplicate_ids) os << " duplicate-id(" << id << ")";
    return os.str();
}

void require_valid(const TableGrid& grid) {
    const ValidationReport report = validate(grid);
    if (!report.valid) throw InvalidGrid(describe(report));
}

} // namespace tsr
