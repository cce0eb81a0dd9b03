#include "tprof/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <tuple>
#include <unordered_map>

#include "tprof/errors.hpp"
#include "tprof/geo.hpp"
#include "tprof/util.hpp"

namespace tprof {

namespace {

constexpr std::string_view kHeaderMps =
    "journey_id,timestamp_ms,lat,lon,speed_mps,heading_deg";
constexpr std::string_view kHeaderMph =
    "journey_id,timestamp_ms,lat,lon,speed_mph,heading_deg";

}  // namespace

ParseResult parse_waypoints(std::istream& in, const std::string& source_name) {
    ParseResult out;
    bool have_header = false;

    std::string raw;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view s = util::trim(raw);
        if (s.empty() || s.front() == '#') continue;

        if (!have_header) {
            if (s == kHeaderMps) {
                out.unit = SpeedUnit::mps;
            } else if (s == kHeaderMph) {
                out.unit = SpeedUnit::mph;
            } else {
                throw InputError(source_name + ":" + std::to_string(line_no) +
                                 ": expected waypoint header `" +
                                 std::string(kHeaderMps) + "` or the speed_mph "
                                 "variant");
            }
            have_header = true;
            continue;
        }

        ++out.data_lines;
        auto reject = [&](const char* reason) {
            out.rejects.push_back({line_no, reason});
        };

        util::split_csv(s, fields);
        if (fields.size() != 6) {
            reject("field count != 6");
            continue;
        }
        const auto ts = util::parse_int64(fields[1]);
        if (!ts) { reject("unparsable timestamp_ms"); continue; }
        const auto lat = util::parse_double(fields[2]);
        if (!lat) { reject("unparsable lat"); continue; }
        if (*lat < -90.0 || *lat > 90.0) { reject("lat out of range"); continue; }
        const auto lon = util::parse_double(fields[3]);
        if (!lon) { reject("unparsable lon"); continue; }
        if (*lon < -180.0 || *lon > 180.0) { reject("lon out of range"); continue; }
        auto speed = util::parse_double(fields[4]);
        if (!speed) { reject("unparsable speed"); continue; }
        if (*speed < 0.0) { reject("speed out of range"); continue; }
        const auto heading = util::parse_double(fields[5]);
        if (!heading) { reject("unparsable heading"); continue; }
        if (*heading < 0.0 || *heading >= 360.0) {
            reject("heading out of range");
            continue;
        }
        if (out.unit == SpeedUnit::mph) *speed *= geo::kMphToMps;

        WaypointRecord rec;
        rec.journey_id = std::string(util::trim(fields[0]));
        rec.timestamp_ms = *ts;
        rec.lat = *lat;
        rec.lon = *lon;
        rec.speed_mps = *speed;
        rec.heading_deg = *heading;
        out.records.push_back(std::move(rec));
    }
    return out;
}

ParseResult parse_waypoints_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("waypoint file not readable: " + path);
    return parse_waypoints(in, path);
}

std::vector<Journey> assemble_journeys(std::vector<WaypointRecord> records,
                                       std::int64_t gap_split_ms) {
    std::unordered_map<std::string, std::vector<Ping>> groups;
    for (auto& rec : records) {
        groups[rec.journey_id].push_back(
            {rec.timestamp_ms, rec.lat, rec.lon, rec.speed_mps, rec.heading_deg});
    }
    records.clear();
    records.shrink_to_fit();

    std::vector<Journey> out;
    for (auto& [id, pings] : groups) {
        // Full-content ordering makes duplicate-timestamp resolution (and
        // therefore the whole assembly) independent of input order.
        std::sort(pings.begin(), pings.end(), [](const Ping& a, const Ping& b) {
            return std::tie(a.timestamp_ms, a.lat, a.lon, a.speed_mps,
                            a.heading_deg) < std::tie(b.timestamp_ms, b.lat,
                                                      b.lon, b.speed_mps,
                                                      b.heading_deg);
        });
        pings.erase(std::unique(pings.begin(), pings.end(),
                                [](const Ping& a, const Ping& b) {
                                    return a.timestamp_ms == b.timestamp_ms;
                                }),
                    pings.end());

        std::vector<std::vector<Ping>> parts;
        parts.emplace_back();
        for (const Ping& p : pings) {
            if (!parts.back().empty() &&
                p.timestamp_ms - parts.back().back().timestamp_ms > gap_split_ms) {
                parts.emplace_back();
            }
            parts.back().push_back(p);
        }
        if (parts.size() == 1) {
            out.push_back({id, std::move(parts[0])});
        } else {
            for (std::size_t k = 0; k < parts.size(); ++k) {
                out.push_back({id + "~" + std::to_string(k), std::move(parts[k])});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Journey& a, const Journey& b) {
        return a.id < b.id;
    });
    return out;
}

}  // namespace tprof
