#pragma once

#include "tsr/core.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tsr::io {

// One table per line:
//   {"image_size":[w,h]?, "cells":[{"id":int, "logical":[rs,re,cs,ce],
//     "quad":[[x,y]x4]?, "content":str?}]}

[[nodiscard]] TableGrid grid_from_json_line(std::string_view line);
[[nodiscard]] std::string grid_to_json_line(const TableGrid& grid);

/// Reads every non-blank line. ParseError messages carry the 1-based line number.
[[nodiscard]] std::vector<TableGrid> read_jsonl(std::istream& in);
[[nodiscard]] std::vector<TableGrid> read_jsonl_file(const std::string& path);

void write_jsonl(std::ostream& out, const std::vector<TableGrid>& grids);
void write_jsonl_file(const std::string& path, const std::vector<TableGrid>& grids);

} // namespace tsr::io
