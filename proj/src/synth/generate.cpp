#include "tsr/synth.hpp"

#include "tsr/error.hpp"
#include "tsr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tsr::synth {

namespace {

constexpr double kMargin = 0.04;       // fraction of the image kept clear on each side
constexpr double kPitchJitter = 0.1;   // per-table scale variation of row/column pitch

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

std::string random_word(Rng& rng) {
    const int len = rng.uniform_int(1, 6);
    std::string s;
    for (int i = 0; i < len; ++i) s += static_cast<char>('a' + rng.uniform_int(0, 25));
    return s;
}

// Boundary positions 0 = b_0 < b_1 < ... < b_n = n * pitch, interior lines
// displaced by up to `jitter` of the pitch.
std::vector<double> boundary_lines(Rng& rng, int n, double pitch, double jitter) {
    std::vector<double> b(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        double off = 0.0;
        if (k > 0 && k < n) off = rng.uniform(-jitter, jitter);
        b[k] = (k + off) * pitch;
    }
    return b;
}

} // namespace

void SynthConfig::validate() const {
    require(n_tables >= 0, "n_tables must be non-negative");
    require(rows_min >= 1 && rows_min <= rows_max, "rows range must be non-empty with rows_min >= 1");
    require(cols_min >= 1 && cols_min <= cols_max, "cols range must be non-empty with cols_min >= 1");
    require(span_probability >= 0.0 && span_probability <= 1.0, "span_probability must lie in [0,1]");
    require(hole_probability >= 0.0 && hole_probability <= 1.0, "hole_probability must lie in [0,1]");
    require(max_span >= 1, "max_span must be >= 1");
    require(jitter >= 0.0 && jitter < 0.5, "jitter must lie in [0, 0.5)");
    require(line_jitter >= 0.0 && line_jitter < 0.5, "line_jitter must lie in [0, 0.5)");
    require(rotation >= 0.0 && rotation <= 45.0, "rotation must lie in [0, 45] degrees");
    require(image_size.width > 0.0 && image_size.height > 0.0, "image_size must be positive");
}

TableGrid generate_one(const SynthConfig& config, std::uint64_t index) {
    Rng rng(config.seed, index);
    const int rows = rng.uniform_int(config.rows_min, config.rows_max);
    const int cols = rng.uniform_int(config.cols_min, config.cols_max);

    // Logical layout: greedy rectangular merges over a row-major scan.
    std::vector<int> owner(static_cast<std::size_t>(rows) * cols, -1);
    auto slot = [&](int r, int c) -> int& { return owner[static_cast<std::size_t>(r) * cols + c]; };
    std::vector<LogicalLocation> logical;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (slot(r, c) != -1) continue;
            int rs = 1;
            int cs = 1;
            if (config.max_span > 1 && rng.bernoulli(config.span_probability)) {
                do {
                    rs = rng.uniform_int(1, config.max_span);
                    cs = rng.uniform_int(1, config.max_span);
                } while (rs == 1 && cs == 1);
                bool fits = r + rs <= rows && c + cs <= cols;
                for (int y = r; fits && y < r + rs; ++y) {
                    for (int x = c; fits && x < c + cs; ++x) fits = slot(y, x) == -1;
                }
                if (!fits) rs = cs = 1;
            }
            const int id = static_cast<int>(logical.size());
            for (int y = r; y < r + rs; ++y) {
                for (int x = c; x < c + cs; ++x) slot(y, x) = id;
            }
            logical.push_back({r, r + rs - 1, c, c + cs - 1});
        }
    }

    // Geometry: table-local boundary lines, then rotation about the table
    // centre, then per-corner jitter.
    const double W = config.image_size.width;
    const double H = config.image_size.height;
    const double usable_w = W * (1.0 - 2.0 * kMargin);
    const double usable_h = H * (1.0 - 2.0 * kMargin);
    const double scale = rng.uniform(1.0 - kPitchJitter, 1.0);
    double col_pitch = usable_w / config.cols_max * scale;
    double row_pitch = usable_h / config.rows_max * scale;
    const double theta = config.rotation > 0.0 ? rng.uniform(-config.rotation, config.rotation) * std::numbers::pi / 180.0 : 0.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    {
        const double tw = cols * col_pitch;
        const double th = rows * row_pitch;
        const double bw = tw * std::abs(cos_t) + th * std::abs(sin_t);
        const double bh = tw * std::abs(sin_t) + th * std::abs(cos_t);
        const double shrink = std::min({1.0, usable_w / bw, usable_h / bh});
        col_pitch *= shrink;
        row_pitch *= shrink;
    }
    const double tw = cols * col_pitch;
    const double th = rows * row_pitch;
    const double bw = tw * std::abs(cos_t) + th * std::abs(sin_t);
    const double bh = tw * std::abs(sin_t) + th * std::abs(cos_t);
    const double cx = W * kMargin + bw / 2.0 + rng.uniform(0.0, std::max(0.0, usable_w - bw));
    const double cy = H * kMargin + bh / 2.0 + rng.uniform(0.0, std::max(0.0, usable_h - bh));

    const std::vector<double> xs = boundary_lines(rng, cols, col_pitch, config.line_jitter);
    const std::vector<double> ys = boundary_lines(rng, rows, row_pitch, config.line_jitter);

    auto place = [&](double lx, double ly) {
        const double dx = lx - tw / 2.0;
        const double dy = ly - th / 2.0;
        return Point{cx + dx * cos_t - dy * sin_t, cy + dx * sin_t + dy * cos_t};
    };

    TableGrid grid;
    grid.image_size = config.image_size;
    for (std::size_t id = 0; id < logical.size(); ++id) {
        const LogicalLocation& l = logical[id];
        if (!l.spanning() && config.hole_probability > 0.0 && rng.bernoulli(config.hole_probability)) {
            // Draw the jitter anyway so hole decisions do not shift later cells.
            for (int k = 0; k < 8; ++k) (void)rng.uniform();
            continue;
        }
        const double x0 = xs[l.c_s];
        const double x1 = xs[l.c_e + 1];
        const double y0 = ys[l.r_s];
        const double y1 = ys[l.r_e + 1];
        std::array<Point, 4> pts = {place(x0, y0), place(x1, y0), place(x1, y1), place(x0, y1)};
        const double cw = x1 - x0;
        const double ch = y1 - y0;
        for (Point& p : pts) {
            p.x += rng.uniform(-config.jitter, config.jitter) * cw;
            p.y += rng.uniform(-config.jitter, config.jitter) * ch;
            p.x = std::clamp(p.x, 0.0, W);
            p.y = std::clamp(p.y, 0.0, H);
        }
        TableCell cell;
        cell.id = static_cast<int>(grid.cells.size());
        cell.logical = l;
        cell.quad.emplace(pts);
        if (config.with_content) cell.content = random_word(rng);
        grid.cells.push_back(std::move(cell));
    }
    return grid;
}

std::vector<TableGrid> generate(const SynthConfig& config) {
    config.validate();
    std::vector<TableGrid> out;
    out.reserve(static_cast<std::size_t>(config.n_tables));
    for (int t = 0; t < config.n_tables; ++t) out.push_back(generate_one(config, static_cast<std::uint64_t>(t)));
    return out;
}

TableGrid regular_grid(int rows, int cols, double cell_width, double cell_height) {
    TableGrid grid;
    grid.image_size = ImageSize{cols * cell_width + 2.0 * cell_width, rows * cell_height + 2.0 * cell_height};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double x0 = (c + 1) * cell_width;
            const double y0 = (r + 1) * cell_height;
            TableCell cell;
            cell.id = static_cast<int>(grid.cells.size());
            cell.logical = {r, r, c, c};
            cell.quad.emplace(std::array<Point, 4>{Point{x0, y0}, Point{x0 + cell_width, y0},
                                                   Point{x0 + cell_width, y0 + cell_height}, Point{x0, y0 + cell_height}});
            grid.cells.push_back(std::move(cell));
        }
    }
    return grid;
}

TableGrid make_shifted_variant(const TableGrid& grid, int row_offset_from) {
    require_valid(grid);
    const GridDims dims = dimensions(grid);
    if (row_offset_from < 0 || row_offset_from >= dims.rows) {
        throw IndexError("row " + std::to_string(row_offset_from) + " outside a grid of " + std::to_string(dims.rows) + " rows");
    }
    TableGrid out = grid;
    for (TableCell& c : out.cells) {
        if (c.logical.r_s >= row_offset_from) {
            ++c.logical.r_s;
            ++c.logical.r_e;
        }
    }
    return out;
}

double spanning_fraction(const std::vector<TableGrid>& grids) noexcept {
    std::size_t cells = 0;
    std::size_t spanning = 0;
    for (const TableGrid& g : grids) {
        for (const TableCell& c : g.cells) {
            ++cells;
            spanning += c.logical.spanning();
        }
    }
    return cells ? static_cast<double>(spanning) / static_cast<double>(cells) : 0.0;
}

} // namespace tsr::synth
