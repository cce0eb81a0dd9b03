#include "tprof/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tprof/errors.hpp"
#include "tprof/kernels.hpp"
#include "tprof/util.hpp"

namespace tprof {

HeatmapGrid build_grid(const ValueTable& table, const std::string& metric,
                       Direction direction) {
    const int col = table.column_ix(metric);
    if (col < 0) {
        throw InputError("UnknownMetric: table has no column '" + metric + "'");
    }
    const double seg_len = meta_double(table.meta, "segment_length_miles");
    const std::string len_key = direction == Direction::EB
                                    ? "route_length_miles_eb"
                                    : "route_length_miles_wb";
    const double route_len = meta_double(table.meta, len_key);
    const SegmentGrid seg_grid(seg_len, route_len);

    HeatmapGrid grid;
    grid.metric = metric;
    grid.direction = direction;
    grid.n_segments = seg_grid.segment_count;
    grid.n_intervals = 0;
    for (const TableRow& r : table.rows) {
        if (r.direction != direction) continue;
        grid.n_intervals = std::max(grid.n_intervals, r.interval + 1);
        if (r.segment >= grid.n_segments) {
            throw InputError("TableParse: segment " + std::to_string(r.segment) +
                             " exceeds the grid implied by " + len_key);
        }
    }
    grid.values.assign(static_cast<std::size_t>(grid.n_segments) *
                           static_cast<std::size_t>(grid.n_intervals),
                       std::nullopt);

    std::vector<double> present;
    for (const TableRow& r : table.rows) {
        if (r.direction != direction) continue;
        const auto& v = r.values[static_cast<std::size_t>(col)];
        if (!v) continue;
        grid.values[static_cast<std::size_t>(r.segment) *
                        static_cast<std::size_t>(grid.n_intervals) +
                    static_cast<std::size_t>(r.interval)] = *v;
        present.push_back(*v);
    }
    grid.present_cells = present.size();
    if (!present.empty()) {
        kernels::ops().min_max(present.data(), present.size(), grid.min_value,
                               grid.max_value);
    }
    return grid;
}

void write_matrix_csv(const std::string& path, const HeatmapGrid& grid) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    for (int s = 0; s < grid.n_segments; ++s) {
        for (int k = 0; k < grid.n_intervals; ++k) {
            if (k > 0) out << ",";
            const auto& v = grid.at(s, k);
            if (v) out << util::format_double(*v);
        }
        out << "\n";
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

void write_pgm(const std::string& path, const HeatmapGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    out << "P5\n"
        << grid.n_intervals << " " << grid.n_segments << "\n"
        << 255 << "\n";
    const double span = grid.max_value - grid.min_value;
    for (int s = 0; s < grid.n_segments; ++s) {
        for (int k = 0; k < grid.n_intervals; ++k) {
            const auto& v = grid.at(s, k);
            unsigned char pixel = 0;
            if (v && span > 0.0) {
                const double scaled = (*v - grid.min_value) / span * 255.0;
                pixel = static_cast<unsigned char>(std::lround(
                    std::clamp(scaled, 0.0, 255.0)));
            }
            out.put(static_cast<char>(pixel));
        }
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

}  // namespace tprof
