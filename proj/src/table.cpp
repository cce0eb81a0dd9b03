#include "tprof/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tprof/errors.hpp"
#include "tprof/util.hpp"

namespace tprof {

const std::vector<std::string> kMetricsColumns = {
    "n_vehicles",        "n_waypoints",      "mean_speed_mps",
    "std_speed_mps",     "waypoints_per_vehicle", "pct_brakes",
    "pct_high_jerk",     "hard_accel_count", "hard_brake_count",
    "avg_heading_change", "avg_fuel_ml_per_veh"};

const std::vector<std::string> kIndexColumns = {"safety_index", "comfort_index",
                                                "stability_index"};

int ValueTable::column_ix(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

namespace {

std::vector<std::optional<double>> metrics_values(const CellMetrics& m) {
    return {static_cast<double>(m.n_vehicles),
            static_cast<double>(m.n_waypoints),
            m.mean_speed_mps,
            m.std_speed_mps,
            m.waypoints_per_vehicle,
            m.pct_brakes,
            m.pct_high_jerk,
            static_cast<double>(m.hard_accel_count),
            static_cast<double>(m.hard_brake_count),
            m.avg_heading_change,
            m.avg_fuel_ml_per_veh};
}

}  // namespace

ValueTable metrics_to_table(const std::vector<CellMetrics>& cells, TableMeta meta) {
    ValueTable t;
    t.meta = std::move(meta);
    t.columns = kMetricsColumns;
    t.rows.reserve(cells.size());
    for (const CellMetrics& m : cells) {
        t.rows.push_back({m.key.direction, m.key.segment, m.key.interval,
                          metrics_values(m)});
    }
    return t;
}

ValueTable indexed_to_table(const std::vector<IndexedCell>& cells, TableMeta meta,
                            bool with_per_waypoint) {
    ValueTable t;
    t.meta = std::move(meta);
    t.columns = kMetricsColumns;
    t.columns.insert(t.columns.end(), kIndexColumns.begin(), kIndexColumns.end());
    if (with_per_waypoint) t.columns.push_back("stability_per_waypoint");
    t.rows.reserve(cells.size());
    for (const IndexedCell& c : cells) {
        auto values = metrics_values(c.metrics);
        values.push_back(c.safety);
        values.emplace_back(c.comfort);
        values.emplace_back(c.stability);
        if (with_per_waypoint) values.push_back(c.stability_per_waypoint);
        t.rows.push_back({c.metrics.key.direction, c.metrics.key.segment,
                          c.metrics.key.interval, std::move(values)});
    }
    return t;
}

std::vector<CellMetrics> table_to_metrics(const ValueTable& table) {
    std::vector<int> ix(kMetricsColumns.size());
    for (std::size_t i = 0; i < kMetricsColumns.size(); ++i) {
        ix[i] = table.column_ix(kMetricsColumns[i]);
        if (ix[i] < 0) {
            throw InputError("MissingColumn: metrics table lacks column '" +
                             kMetricsColumns[i] + "'");
        }
    }
    std::vector<CellMetrics> out;
    out.reserve(table.rows.size());
    for (const TableRow& r : table.rows) {
        auto field = [&](std::size_t i) -> double {
            const auto& v = r.values.at(static_cast<std::size_t>(ix[i]));
            if (!v) {
                throw InputError("MissingValue: empty '" + kMetricsColumns[i] +
                                 "' in metrics row");
            }
            return *v;
        };
        CellMetrics m;
        m.key = {r.direction, r.segment, r.interval};
        m.n_vehicles = static_cast<std::uint32_t>(std::llround(field(0)));
        m.n_waypoints = static_cast<std::uint64_t>(std::llround(field(1)));
        m.mean_speed_mps = field(2);
        m.std_speed_mps = field(3);
        m.waypoints_per_vehicle = field(4);
        m.pct_brakes = field(5);
        m.pct_high_jerk = field(6);
        m.hard_accel_count = static_cast<std::uint64_t>(std::llround(field(7)));
        m.hard_brake_count = static_cast<std::uint64_t>(std::llround(field(8)));
        m.avg_heading_change = field(9);
        m.avg_fuel_ml_per_veh = field(10);
        out.push_back(std::move(m));
    }
    return out;
}

void write_table(const std::string& path, const ValueTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    for (const auto& [key, value] : table.meta) {
        out << "# " << key << " = " << value << "\n";
    }
    out << "direction,segment,interval";
    for (const auto& c : table.columns) out << "," << c;
    out << "\n";
    for (const TableRow& r : table.rows) {
        out << to_string(r.direction) << "," << r.segment << "," << r.interval;
        for (const auto& v : r.values) {
            out << ",";
            if (v) out << util::format_double(*v);
        }
        out << "\n";
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

ValueTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("FileOpen: cannot read '" + path + "'");
    }
    ValueTable t;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& why) {
        throw InputError("TableParse: " + path + ":" + std::to_string(line_no) +
                         ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed(util::trim(line));
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            // Metadata comment: `# key = value`. Other comments pass through.
            const auto body = util::trim(std::string_view(trimmed).substr(1));
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                const auto key = util::trim(body.substr(0, eq));
                const auto value = util::trim(body.substr(eq + 1));
                if (!key.empty()) t.meta[std::string(key)] = std::string(value);
            }
            continue;
        }
        const auto fields = util::split_csv(trimmed);
        if (!header_seen) {
            if (fields.size() < 3 || fields[0] != "direction" ||
                fields[1] != "segment" || fields[2] != "interval") {
                fail("expected header starting 'direction,segment,interval'");
            }
            t.columns.assign(fields.begin() + 3, fields.end());
            header_seen = true;
            continue;
        }
        if (fields.size() != t.columns.size() + 3) {
            fail("expected " + std::to_string(t.columns.size() + 3) +
                 " fields, got " + std::to_string(fields.size()));
        }
        TableRow row;
        const auto dir = parse_direction(fields[0]);
        if (!dir) fail("unknown direction '" + std::string(fields[0]) + "'");
        row.direction = *dir;
        const auto seg = util::parse_int64(fields[1]);
        const auto itv = util::parse_int64(fields[2]);
        if (!seg || !itv || *seg < 0 || *itv < 0) fail("bad segment/interval");
        row.segment = static_cast<std::int32_t>(*seg);
        row.interval = static_cast<std::int32_t>(*itv);
        row.values.reserve(t.columns.size());
        for (std::size_t i = 3; i < fields.size(); ++i) {
            if (fields[i].empty()) {
                row.values.emplace_back(std::nullopt);
                continue;
            }
            const auto v = util::parse_double(fields[i]);
            if (!v) fail("unparsable value '" + std::string(fields[i]) + "'");
            row.values.emplace_back(*v);
        }
        t.rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw InputError("TableParse: " + path + ": no header line found");
    }
    return t;
}

double meta_double(const TableMeta& meta, const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) {
        throw InputError("MissingMeta: table lacks '# " + key + " = ...'");
    }
    const auto v = util::parse_double(it->second);
    if (!v) {
        throw InputError("BadMeta: '" + key + "' value '" + it->second +
                         "' is not a number");
    }
    return *v;
}

std::int64_t meta_int64(const TableMeta& meta, const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) {
        throw InputError("MissingMeta: table lacks '# " + key + " = ...'");
    }
    const auto v = util::parse_int64(it->second);
    if (!v) {
        throw InputError("BadMeta: '" + key + "' value '" + it->second +
                         "' is not an integer");
    }
    return *v;
}

std::optional<double> meta_double_opt(const TableMeta& meta, const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) return std::nullopt;
    const auto v = util::parse_double(it->second);
    if (!v) {
        throw InputError("BadMeta: '" + key + "' value '" + it->second +
                         "' is not a number");
    }
    return *v;
}

}  // namespace tprof
