#pragma once

#include "tsr/core.hpp"

#include <cstdint>
#include <vector>

namespace tsr::synth {

struct SynthConfig {
    int n_tables = 100;
    int rows_min = 2;
    int rows_max = 8;
    int cols_min = 2;
    int cols_max = 8;
    double span_probability = 0.2;  // chance a merge is attempted at a free slot
    int max_span = 3;
    double jitter = 0.05;           // corner noise, fraction of cell size
    double rotation = 0.0;          // max table rotation, degrees
    double hole_probability = 0.0;
    double line_jitter = 0.15;      // interior boundary-line offset, fraction of pitch
    ImageSize image_size{1024.0, 1024.0};
    bool with_content = true;
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Deterministic per (seed, table index).
[[nodiscard]] std::vector<TableGrid> generate(const SynthConfig& config);
[[nodiscard]] TableGrid generate_one(const SynthConfig& config, std::uint64_t index);

/// Regular rows x cols grid with unit cells and axis-aligned quads.
[[nodiscard]] TableGrid regular_grid(int rows, int cols, double cell_width = 100.0, double cell_height = 40.0);

/// Moves every cell starting at or below `row_offset_from` down one row; quads
/// are untouched. Throws IndexError when the row is outside the grid.
[[nodiscard]] TableGrid make_shifted_variant(const TableGrid& grid, int row_offset_from);

[[nodiscard]] double spanning_fraction(const std::vector<TableGrid>& grids) noexcept;

} // namespace tsr::synth
