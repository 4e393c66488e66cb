#include "tsr/error.hpp"
#include "tsr/transform.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace tsr {

std::string html_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += ch;
        }
    }
    return out;
}

namespace {

std::string html_unescape(std::string_view s) {
    static constexpr std::pair<std::string_view, char> kEntities[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''}};
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        bool replaced = false;
        if (s[i] == '&') {
            for (const auto& [entity, ch] : kEntities) {
                if (s.substr(i, entity.size()) == entity) {
                    out += ch;
                    i += entity.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out += s[i++];
    }
    return out;
}

MarkupToken tok(TokenKind k) { return MarkupToken{k, 1, 1, {}}; }

} // namespace

void check_markup_grammar(const MarkupSequence& seq) {
    enum class Ctx { Outside, Table, Row, Cell, CellText, Done };
    Ctx ctx = Ctx::Outside;
    for (std::size_t n = 0; n < seq.tokens.size(); ++n) {
        const MarkupToken& t = seq.tokens[n];
        auto fail = [&](const char* msg) {
            throw ParseError("token " + std::to_string(n) + " (" + t.str() + "): " + msg);
        };
        switch (t.kind) {
        case TokenKind::TableOpen:
            if (ctx != Ctx::Outside) fail("<table> must open the sequence");
            ctx = Ctx::Table;
            break;
        case TokenKind::TableClose:
            if (ctx != Ctx::Table) fail("</table> outside table level");
            ctx = Ctx::Done;
            break;
        case TokenKind::RowOpen:
            if (ctx != Ctx::Table) fail("<tr> must be inside <table>");
            ctx = Ctx::Row;
            break;
        case TokenKind::RowClose:
            if (ctx != Ctx::Row) fail("</tr> without open row");
            ctx = Ctx::Table;
            break;
        case TokenKind::CellOpen:
            if (ctx != Ctx::Row) fail("<td> must be inside <tr>");
            if (t.rowspan < 1 || t.colspan < 1) fail("spans must be positive");
            ctx = Ctx::Cell;
            break;
        case TokenKind::Text:
            if (ctx != Ctx::Cell) fail("text must be inside <td>");
            ctx = Ctx::CellText;
            break;
        case TokenKind::CellClose:
            if (ctx != Ctx::Cell && ctx != Ctx::CellText) fail("</td> without open cell");
            ctx = Ctx::Row;
            break;
        }
    }
    if (ctx != Ctx::Done) throw ParseError("markup is not closed by </table>");
}

namespace {

int parse_span(std::string_view value, std::string_view name) {
    int v = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end || v < 1) {
        throw ParseError("bad " + std::string(name) + " value \"" + std::string(value) + "\"");
    }
    return v;
}

// Parses the inside of `<td ...>` (after "td").
MarkupToken parse_td_attributes(std::string_view attrs) {
    MarkupToken t = tok(TokenKind::CellOpen);
    bool have_row = false;
    bool have_col = false;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= attrs.size()) break;
        const std::size_t name_start = i;
        while (i < attrs.size() && std::isalpha(static_cast<unsigned char>(attrs[i]))) ++i;
        const std::string_view name = attrs.substr(name_start, i - name_start);
        skip_ws();
        if (name.empty() || i >= attrs.size() || attrs[i] != '=') throw ParseError("malformed <td> attribute");
        ++i;
        skip_ws();
        if (i >= attrs.size() || attrs[i] != '"') throw ParseError("attribute value must be double-quoted");
        const std::size_t close = attrs.find('"', i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated attribute value");
        const std::string_view value = attrs.substr(i + 1, close - i - 1);
        i = close + 1;
        if (name == "rowspan" && !have_row) {
            t.rowspan = parse_span(value, name);
            have_row = true;
        } else if (name == "colspan" && !have_col) {
            t.colspan = parse_span(value, name);
            have_col = true;
        } else {
            throw ParseError("unsupported or repeated <td> attribute \"" + std::string(name) + "\"");
        }
    }
    return t;
}

} // namespace

std::string MarkupToken::str() const {
    switch (kind) {
    case TokenKind::TableOpen: return "<table>";
    case TokenKind::TableClose: return "</table>";
    case TokenKind::RowOpen: return "<tr>";
    case TokenKind::RowClose: return "</tr>";
    case TokenKind::CellClose: return "</td>";
    case TokenKind::Text: return html_escape(text);
    case TokenKind::CellOpen: {
        std::string s = "<td";
        if (rowspan > 1) s += " rowspan=\"" + std::to_string(rowspan) + "\"";
        if (colspan > 1) s += " colspan=\"" + std::to_string(colspan) + "\"";
        s += ">";
        return s;
    }
    }
    return {};
}

std::string MarkupSequence::str() const {
    std::string s;
    for (const MarkupToken& t : tokens) s += t.str();
    return s;
}

std::vector<std::string> MarkupSequence::token_strings() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const MarkupToken& t : tokens) out.push_back(t.str());
    return out;
}

MarkupSequence to_markup(const TableGrid& grid, ContentMode mode) {
    require_valid(grid);
    const Occupancy occ = occupancy(grid);

    MarkupSequence seq;
    seq.tokens.push_back(tok(TokenKind::TableOpen));
    for (int r = 0; r < occ.rows(); ++r) {
        seq.tokens.push_back(tok(TokenKind::RowOpen));
        for (int c = 0; c < occ.cols(); ++c) {
            const int id = occ.at(r, c);
            if (id == Occupancy::kEmpty) {
                seq.tokens.push_back(tok(TokenKind::CellOpen));
                seq.tokens.push_back(tok(TokenKind::CellClose));
                continue;
            }
            const TableCell& cell = grid.cells[*grid.index_of(id)];
            if (cell.logical.r_s != r || cell.logical.c_s != c) continue;  // covered by an earlier anchor
            MarkupToken open = tok(TokenKind::CellOpen);
            open.rowspan = cell.logical.row_span();
            open.colspan = cell.logical.col_span();
            seq.tokens.push_back(open);
            if (mode == ContentMode::WithContent && cell.content && !cell.content->empty()) {
                MarkupToken text = tok(TokenKind::Text);
                text.text = *cell.content;
                seq.tokens.push_back(std::move(text));
            }
            seq.tokens.push_back(tok(TokenKind::CellClose));
        }
        seq.tokens.push_back(tok(TokenKind::RowClose));
    }
    seq.tokens.push_back(tok(TokenKind::TableClose));
    return seq;
}

MarkupSequence parse_markup(std::string_view html) {
    MarkupSequence seq;
    bool in_cell = false;
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            const std::size_t next = html.find('<', i);
            const std::string_view text = html.substr(i, next == std::string_view::npos ? html.size() - i : next - i);
            if (in_cell) {
                MarkupToken t = tok(TokenKind::Text);
                t.text = html_unescape(text);
                seq.tokens.push_back(std::move(t));
            } else if (std::any_of(text.begin(), text.end(), [](char ch) { return !std::isspace(static_cast<unsigned char>(ch)); })) {
                throw ParseError("stray text outside a cell at offset " + std::to_string(i));
            }
            i += text.size();
            continue;
        }
        const std::size_t close = html.find('>', i);
        if (close == std::string_view::npos) throw ParseError("unterminated tag at offset " + std::to_string(i));
        const std::string_view tag = html.substr(i + 1, close - i - 1);
        if (tag == "table") {
            seq.tokens.push_back(tok(TokenKind::TableOpen));
        } else if (tag == "/table") {
            seq.tokens.push_back(tok(TokenKind::TableClose));
        } else if (tag == "tr") {
            seq.tokens.push_back(tok(TokenKind::RowOpen));
        } else if (tag == "/tr") {
            seq.tokens.push_back(tok(TokenKind::RowClose));
        } else if (tag == "/td") {
            seq.tokens.push_back(tok(TokenKind::CellClose));
            in_cell = false;
        } else if (tag.substr(0, 2) == "td" && (tag.size() == 2 || std::isspace(static_cast<unsigned char>(tag[2])))) {
            seq.tokens.push_back(parse_td_attributes(tag.substr(2)));
            in_cell = true;
        } else {
            throw ParseError("unsupported tag <" + std::string(tag) + ">");
        }
        i = close + 1;
    }
    check_markup_grammar(seq);
    return seq;
}

TableGrid from_markup(const MarkupSequence& seq) {
    check_markup_grammar(seq);

    TableGrid grid;
    // busy_until[c] is the first row at which column c is free again.
    std::vector<int> busy_until;
    int row = -1;
    int col = 0;
    TableCell* open = nullptr;
    for (const MarkupToken& t : seq.tokens) {
        switch (t.kind) {
        case TokenKind::RowOpen:
            ++row;
            col = 0;
            break;
        case TokenKind::CellOpen: {
            while (col < static_cast<int>(busy_until.size()) && busy_until[col] > row) ++col;
            const int last = col + t.colspan - 1;
            if (static_cast<int>(busy_until.size()) <= last) busy_until.resize(last + 1, 0);
            for (int c = col; c <= last; ++c) {
                if (busy_until[c] > row) {
                    throw PlacementError("cell " + std::to_string(grid.cells.size()) + " at row " + std::to_string(row) +
                                         " collides with a row-spanning cell in column " + std::to_string(c));
                }
                busy_until[c] = row + t.rowspan;
            }
            TableCell cell;
            cell.id = static_cast<int>(grid.cells.size());
            cell.logical = {row, row + t.rowspan - 1, col, last};
            grid.cells.push_back(std::move(cell));
            open = &grid.cells.back();
            col = last + 1;
            break;
        }
        case TokenKind::Text:
            if (open) open->content = open->content.value_or("") + t.text;
            break;
        case TokenKind::CellClose:
            open = nullptr;
            break;
        default:
            break;
        }
    }
    return grid;
}

} // namespace tsr
