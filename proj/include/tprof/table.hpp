#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tprof/aggregate.hpp"
#include "tprof/indices.hpp"
#include "tprof/route.hpp"

namespace tprof {

// Run parameters carried as `# key = value` comment lines ahead of the
// header, so a table round-trips with enough context to be re-gridded.
using TableMeta = std::map<std::string, std::string>;

// A (direction, segment, interval)-keyed CSV table with numeric columns.
// Absent values serialize as empty fields.
struct TableRow {
    Direction direction = Direction::EB;
    std::int32_t segment = 0;
    std::int32_t interval = 0;
    std::vector<std::optional<double>> values;
};

struct ValueTable {
    TableMeta meta;
    std::vector<std::string> columns;  // beyond the three key columns
    std::vector<TableRow> rows;

    // Column position, or -1 when absent.
    int column_ix(const std::string& name) const;
};

// Column order of the metrics table, shared by writer and readers.
extern const std::vector<std::string> kMetricsColumns;
extern const std::vector<std::string> kIndexColumns;  // appended when indexed

ValueTable metrics_to_table(const std::vector<CellMetrics>& cells, TableMeta meta);
ValueTable indexed_to_table(const std::vector<IndexedCell>& cells, TableMeta meta,
                            bool with_per_waypoint);

// Rebuilds metrics rows from a table that has (at least) the metrics
// columns. Throws InputError when a required column is missing.
std::vector<CellMetrics> table_to_metrics(const ValueTable& table);

void write_table(const std::string& path, const ValueTable& table);
ValueTable read_table(const std::string& path);

// Meta helpers: required keys throw InputError when missing or unparsable.
double meta_double(const TableMeta& meta, const std::string& key);
std::int64_t meta_int64(const TableMeta& meta, const std::string& key);
std::optional<double> meta_double_opt(const TableMeta& meta, const std::string& key);

}  // namespace tprof
