#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tprof {

// One raw connected-vehicle ping as parsed from the waypoint file. Speed is
// always m/s internally; the file header declares the source unit.
struct WaypointRecord {
    std::string journey_id;
    std::int64_t timestamp_ms = 0;
    double lat = 0.0;
    double lon = 0.0;
    double speed_mps = 0.0;
    double heading_deg = 0.0;
};

struct RejectedLine {
    std::size_t line_no = 0;
    std::string reason;
};

enum class SpeedUnit { mps, mph };

struct ParseResult {
    std::vector<WaypointRecord> records;
    std::vector<RejectedLine> rejects;
    std::size_t data_lines = 0;  // lines excluding header/comments/blank
    SpeedUnit unit = SpeedUnit::mps;
};

// Parses the waypoint CSV. Every data line becomes either a record or a
// rejection entry; nothing is dropped silently. A missing or malformed
// header throws InputError.
ParseResult parse_waypoints(std::istream& in, const std::string& source_name);
ParseResult parse_waypoints_file(const std::string& path);

struct Ping {
    std::int64_t timestamp_ms = 0;
    double lat = 0.0;
    double lon = 0.0;
    double speed_mps = 0.0;
    double heading_deg = 0.0;
};

struct Journey {
    std::string id;
    std::vector<Ping> pings;  // strictly increasing timestamps
};

// Groups records by journey id, orders them in time, drops exact duplicate
// timestamps, and splits at gaps larger than gap_split_ms (split parts get
// `~<k>` id suffixes). Content-deterministic: the result does not depend on
// input order.
std::vector<Journey> assemble_journeys(std::vector<WaypointRecord> records,
                                       std::int64_t gap_split_ms);

}  // namespace tprof
