#pragma once

#include "tsr/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tsr {

enum class Direction { None = 0, Horizontal = 1, Vertical = 2 };

[[nodiscard]] const char* to_string(Direction d) noexcept;

/// Ordered immediate-neighbour relation. For Horizontal, cell `i` sits directly
/// right of cell `j`; for Vertical, `i` sits directly under `j`.
struct AdjacencyPair {
    int i = 0;
    int j = 0;
    Direction direction = Direction::None;

    friend auto operator<=>(const AdjacencyPair&, const AdjacencyPair&) = default;
};

struct AdjacencySets {
    std::vector<AdjacencyPair> horizontal;  // sorted
    std::vector<AdjacencyPair> vertical;    // sorted
};

/// Throws InvalidGrid when the grid has overlaps or malformed cells.
[[nodiscard]] AdjacencySets adjacency_pairs(const TableGrid& grid);

/// N x N labels indexed by position in grid.cells; symmetric, diagonal None.
struct AdjacencyMatrix {
    std::size_t n = 0;
    std::vector<Direction> labels;

    [[nodiscard]] Direction at(std::size_t a, std::size_t b) const noexcept { return labels[a * n + b]; }
};

[[nodiscard]] AdjacencyMatrix adjacency_matrix(const TableGrid& grid);

// ---------------------------------------------------------------------------
// Markup

enum class TokenKind { TableOpen, TableClose, RowOpen, RowClose, CellOpen, CellClose, Text };

struct MarkupToken {
    TokenKind kind = TokenKind::Text;
    int rowspan = 1;  // CellOpen only
    int colspan = 1;  // CellOpen only
    std::string text; // Text only

    /// Canonical text of the token, e.g. `<td rowspan="2">`. Text tokens are
    /// HTML-escaped.
    [[nodiscard]] std::string str() const;

    friend bool operator==(const MarkupToken&, const MarkupToken&) = default;
};

struct MarkupSequence {
    std::vector<MarkupToken> tokens;

    [[nodiscard]] std::string str() const;
    /// Canonical token strings; the unit of BLEU n-grams.
    [[nodiscard]] std::vector<std::string> token_strings() const;

    friend bool operator==(const MarkupSequence&, const MarkupSequence&) = default;
};

enum class ContentMode { StructureOnly, WithContent };

/// Row-major emission over the occupancy matrix. Holes become `<td></td>`.
[[nodiscard]] MarkupSequence to_markup(const TableGrid& grid, ContentMode mode = ContentMode::StructureOnly);

/// Nesting check: <tr> inside <table>, <td> inside <tr>, text inside <td>.
/// Throws ParseError.
void check_markup_grammar(const MarkupSequence& seq);

/// Tokenizes the minimal table grammar; throws ParseError.
[[nodiscard]] MarkupSequence parse_markup(std::string_view html);

/// HTML table placement; ids are assigned 0.. in document order. Throws
/// ParseError on bad nesting and PlacementError when spans collide.
[[nodiscard]] TableGrid from_markup(const MarkupSequence& seq);

[[nodiscard]] std::string html_escape(std::string_view s);

} // namespace tsr
