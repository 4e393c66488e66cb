#include "tsr/io.hpp"

#include "tsr/error.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace tsr::io {

using nlohmann::json;

namespace {

int as_int(const json& j, const char* what) {
    if (!j.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
    return j.get<int>();
}

double as_number(const json& j, const char* what) {
    if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
    return j.get<double>();
}

TableCell cell_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("cell must be an object");
    TableCell cell;
    if (!j.contains("id")) throw ParseError("cell is missing \"id\"");
    cell.id = as_int(j.at("id"), "id");

    if (!j.contains("logical")) throw ParseError("cell " + std::to_string(cell.id) + " is missing \"logical\"");
    const json& lg = j.at("logical");
    if (!lg.is_array() || lg.size() != 4) throw ParseError("\"logical\" must be [rs,re,cs,ce]");
    cell.logical = {as_int(lg[0], "rs"), as_int(lg[1], "re"), as_int(lg[2], "cs"), as_int(lg[3], "ce")};

    if (j.contains("quad") && !j.at("quad").is_null()) {
        const json& q = j.at("quad");
        if (!q.is_array() || q.size() != 4) throw ParseError("\"quad\" must hold 4 points");
        std::array<Point, 4> pts;
        for (std::size_t k = 0; k < 4; ++k) {
            if (!q[k].is_array() || q[k].size() != 2) throw ParseError("quad point must be [x,y]");
            pts[k] = {as_number(q[k][0], "x"), as_number(q[k][1], "y")};
        }
        try {
            cell.quad.emplace(pts);
        } catch (const DomainError& e) {
            throw ParseError("cell " + std::to_string(cell.id) + ": " + e.what());
        }
    }
    if (j.contains("content") && !j.at("content").is_null()) {
        if (!j.at("content").is_string()) throw ParseError("\"content\" must be a string");
        cell.content = j.at("content").get<std::string>();
    }
    return cell;
}

json grid_to_json(const TableGrid& grid) {
    json out = json::object();
    if (grid.image_size) out["image_size"] = {grid.image_size->width, grid.image_size->height};
    json cells = json::array();
    for (const TableCell& c : grid.cells) {
        json jc = json::object();
        jc["id"] = c.id;
        jc["logical"] = {c.logical.r_s, c.logical.r_e, c.logical.c_s, c.logical.c_e};
        if (c.quad) {
            json q = json::array();
            for (const Point& p : c.quad->corners()) q.push_back({p.x, p.y});
            jc["quad"] = std::move(q);
        }
        if (c.content) jc["content"] = *c.content;
        cells.push_back(std::move(jc));
    }
    out["cells"] = std::move(cells);
    return out;
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

TableGrid grid_from_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("table must be a JSON object");

    TableGrid grid;
    if (j.contains("image_size") && !j.at("image_size").is_null()) {
        const json& s = j.at("image_size");
        if (!s.is_array() || s.size() != 2) throw ParseError("\"image_size\" must be [w,h]");
        grid.image_size = ImageSize{as_number(s[0], "width"), as_number(s[1], "height")};
        if (!(grid.image_size->width > 0.0) || !(grid.image_size->height > 0.0)) {
            throw ParseError("\"image_size\" must be positive");
        }
    }
    if (!j.contains("cells") || !j.at("cells").is_array()) throw ParseError("table is missing the \"cells\" array");
    for (const json& jc : j.at("cells")) grid.cells.push_back(cell_from_json(jc));
    return grid;
}

std::string grid_to_json_line(const TableGrid& grid) { return grid_to_json(grid).dump(); }

std::vector<TableGrid> read_jsonl(std::istream& in) {
    std::vector<TableGrid> grids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        try {
            grids.push_back(grid_from_json_line(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return grids;
}

std::vector<TableGrid> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<TableGrid>& grids) {
    for (const TableGrid& g : grids) out << grid_to_json_line(g) << '\n';
}

void write_jsonl_file(const std::string& path, const std::vector<TableGrid>& grids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_jsonl(out, grids);
    if (!out) throw Error("write failed: " + path);
}

} // namespace tsr::io
