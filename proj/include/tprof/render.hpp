#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tprof/route.hpp"
#include "tprof/table.hpp"

namespace tprof {

// One metric of one direction as a segments x intervals matrix: the layout
// of the corridor heatmaps (time on x, milepost on y).
struct HeatmapGrid {
    std::string metric;
    Direction direction = Direction::EB;
    int n_segments = 0;
    int n_intervals = 0;
    // Row-major [segment][interval]; absent cells are nullopt.
    std::vector<std::optional<double>> values;
    double min_value = 0.0;  // over present cells
    double max_value = 0.0;
    std::size_t present_cells = 0;

    const std::optional<double>& at(int seg, int interval) const {
        return values[static_cast<std::size_t>(seg) *
                          static_cast<std::size_t>(n_intervals) +
                      static_cast<std::size_t>(interval)];
    }
};

// Throws InputError (UnknownMetric) when the column is missing. Segment
// count comes from the table's grid metadata; interval count from the data.
HeatmapGrid build_grid(const ValueTable& table, const std::string& metric,
                       Direction direction);

// Comma-separated matrix, one row per segment, empty fields for absent cells.
void write_matrix_csv(const std::string& path, const HeatmapGrid& grid);

// Binary PGM (P5), one pixel per cell, linear min-max scaling to 0..255.
// Absent cells render 0; a constant grid (min == max) renders all zero.
void write_pgm(const std::string& path, const HeatmapGrid& grid);

}  // namespace tprof
