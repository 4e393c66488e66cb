#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tsr {

/// Inclusive 0-based grid extent of a cell: rows [r_s, r_e], columns [c_s, c_e].
struct LogicalLocation {
    int r_s = 0;
    int r_e = 0;
    int c_s = 0;
    int c_e = 0;

    [[nodiscard]] bool well_formed() const noexcept {
        return r_s >= 0 && c_s >= 0 && r_s <= r_e && c_s <= c_e;
    }
    [[nodiscard]] int row_span() const noexcept { return r_e - r_s + 1; }
    [[nodiscard]] int col_span() const noexcept { return c_e - c_s + 1; }
    [[nodiscard]] bool spanning() const noexcept { return r_e != r_s || c_e != c_s; }
    [[nodiscard]] bool intersects(const LogicalLocation& o) const noexcept {
        return r_s <= o.r_e && o.r_s <= r_e && c_s <= o.c_e && o.c_s <= c_e;
    }

    friend bool operator==(const LogicalLocation&, const LogicalLocation&) = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Box {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    [[nodiscard]] double area() const noexcept { return (x1 - x0) * (y1 - y0); }
};

/// Cell quadrilateral in pixel space. Corner order is top-left, top-right,
/// bottom-right, bottom-left with y growing downwards, so a well-oriented quad
/// has positive shoelace area.
class SpatialQuad {
public:
    /// Throws DomainError on negative or non-finite coordinates and on
    /// degenerate or inverted polygons.
    explicit SpatialQuad(const std::array<Point, 4>& corners);

    [[nodiscard]] const std::array<Point, 4>& corners() const noexcept { return corners_; }
    [[nodiscard]] const Point& operator[](std::size_t k) const noexcept { return corners_[k]; }
    [[nodiscard]] Point centroid() const noexcept;
    [[nodiscard]] double signed_area() const noexcept;
    [[nodiscard]] Box bounding_box() const noexcept;

    friend bool operator==(const SpatialQuad&, const SpatialQuad&) = default;

private:
    std::array<Point, 4> corners_;
};

[[nodiscard]] double shoelace_area(const std::array<Point, 4>& corners) noexcept;

struct TableCell {
    int id = 0;
    LogicalLocation logical;
    std::optional<SpatialQuad> quad;
    std::optional<std::string> content;

    friend bool operator==(const TableCell&, const TableCell&) = default;
};

struct ImageSize {
    double width = 0.0;
    double height = 0.0;
    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct TableGrid {
    std::vector<TableCell> cells;
    std::optional<ImageSize> image_size;

    [[nodiscard]] bool has_quads() const noexcept;
    /// Position of the cell with the given id in `cells`, if any.
    [[nodiscard]] std::optional<std::size_t> index_of(int id) const noexcept;

    friend bool operator==(const TableGrid&, const TableGrid&) = default;
};

struct Slot {
    int row = 0;
    int col = 0;
    friend bool operator==(const Slot&, const Slot&) = default;
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::pair<int, int>> overlaps;  // cell-id pairs, smaller id first
    std::vector<int> out_of_bounds;             // ids with malformed locations
    std::vector<int> duplicate_ids;
    std::vector<Slot> holes;                    // informational only
};

struct GridDims {
    int rows = 0;
    int cols = 0;
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// rows x cols map from slots to the id of the covering cell.
class Occupancy {
public:
    static constexpr int kEmpty = -1;

    Occupancy() = default;
    Occupancy(int rows, int cols) : rows_(rows), cols_(cols), slots_(static_cast<std::size_t>(rows) * cols, kEmpty) {}

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] int at(int r, int c) const noexcept { return slots_[static_cast<std::size_t>(r) * cols_ + c]; }
    int& at(int r, int c) noexcept { return slots_[static_cast<std::size_t>(r) * cols_ + c]; }
    [[nodiscard]] const std::vector<int>& slots() const noexcept { return slots_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> slots_;
};

[[nodiscard]] ValidationReport validate(const TableGrid& grid);

/// Throws OverlapError when two cells claim a slot and InvalidGrid on
/// malformed locations.
[[nodiscard]] Occupancy occupancy(const TableGrid& grid);

[[nodiscard]] GridDims dimensions(const TableGrid& grid) noexcept;

/// Throws InvalidGrid with a readable summary unless validate() passes.
void require_valid(const TableGrid& grid);

[[nodiscard]] std::string describe(const ValidationReport& report);

} // namespace tsr
