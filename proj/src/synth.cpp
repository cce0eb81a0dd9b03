#include "tprof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "tprof/errors.hpp"
#include "tprof/geo.hpp"
#include "tprof/util.hpp"

namespace tprof {

namespace {

std::string journey_id(Direction dir, int index_one_based) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s-%06d",
                  dir == Direction::EB ? "EB" : "WB", index_one_based);
    return buf;
}

// Move v toward target, changing by at most max_step; lands exactly on the
// target so cruise phases hold a bit-constant speed.
double step_toward(double v, double target, double max_step) {
    const double d = target - v;
    if (d > max_step) return v + max_step;
    if (d < -max_step) return v - max_step;
    return target;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

void ScenarioSpec::validate() const {
    auto bad = [](const std::string& why) {
        throw InputError("InvalidSpec: " + why);
    };
    if (!(corridor_length_mi > 0.0)) bad("corridor_length_mi must be > 0");
    if (!eb && !wb) bad("at least one of eb/wb must be enabled");
    if (vehicles_per_direction < 0) bad("vehicles_per_direction must be >= 0");
    if (!(entry_rate_per_hour > 0.0)) bad("entry_rate_per_hour must be > 0");
    if (!(entry_milepost_mi >= 0.0) || entry_milepost_mi >= corridor_length_mi) {
        bad("entry_milepost_mi must be in [0, corridor_length_mi)");
    }
    if (!(cruise_speed_mps > 0.0)) bad("cruise_speed_mps must be > 0");
    if (!(ping_interval_s > 0.0)) bad("ping_interval_s must be > 0");
    if (!(speed_noise_std_mps >= 0.0)) bad("speed_noise_std_mps must be >= 0");
    if (!(heading_wobble_deg >= 0.0) || heading_wobble_deg >= 90.0) {
        bad("heading_wobble_deg must be in [0, 90)");
    }
    if (!(ramp_mps2 > 0.0)) bad("ramp_mps2 must be > 0");
    if (!geo::valid_coordinate({origin_lat, origin_lon})) bad("origin out of range");
    if (eb && wb && !(carriageway_offset_m >= 1.0)) {
        bad("carriageway_offset_m must be >= 1 when both directions exist");
    }
    if (!(vertex_spacing_mi > 0.0) || vertex_spacing_mi > corridor_length_mi) {
        bad("vertex_spacing_mi must be in (0, corridor_length_mi]");
    }
    if (incident) {
        const IncidentSpec& inc = *incident;
        if (!(inc.start_mi >= 0.0) || !(inc.end_mi >= inc.start_mi) ||
            inc.end_mi > corridor_length_mi) {
            bad("incident range must satisfy 0 <= start <= end <= length");
        }
        if (inc.window_start_ms >= inc.window_end_ms) {
            bad("incident window must satisfy start < end");
        }
        if (!(inc.reduced_speed_mps > 0.0)) {
            bad("incident reduced_speed_mps must be > 0");
        }
        if (!(inc.queue_mi >= 0.0)) bad("incident queue_mi must be >= 0");
    }
}

ScenarioSpec load_scenario(const std::string& path) {
    ScenarioSpec spec;
    IncidentSpec inc;
    bool has_incident = false;
    auto bad_value = [](const std::string& key, const std::string& value) {
        throw InputError("InvalidSpec: key '" + key + "' cannot parse '" + value +
                         "'");
    };
    for (const auto& [key, value] : parse_kv_file(path)) {
        auto num = [&]() {
            const auto v = util::parse_double(value);
            if (!v) bad_value(key, value);
            return *v;
        };
        auto integer = [&]() {
            const auto v = util::parse_int64(value);
            if (!v) bad_value(key, value);
            return *v;
        };
        auto boolean = [&]() {
            const auto v = util::parse_bool(value);
            if (!v) bad_value(key, value);
            return *v;
        };
        if (key == "corridor_length_mi") spec.corridor_length_mi = num();
        else if (key == "eb") spec.eb = boolean();
        else if (key == "wb") spec.wb = boolean();
        else if (key == "vehicles_per_direction")
            spec.vehicles_per_direction = static_cast<int>(integer());
        else if (key == "entry_rate_per_hour") spec.entry_rate_per_hour = num();
        else if (key == "start_time_ms") spec.start_time_ms = integer();
        else if (key == "entry_milepost_mi") spec.entry_milepost_mi = num();
        else if (key == "cruise_speed_mps") spec.cruise_speed_mps = num();
        else if (key == "ping_interval_s") spec.ping_interval_s = num();
        else if (key == "speed_noise_std_mps") spec.speed_noise_std_mps = num();
        else if (key == "heading_wobble_deg") spec.heading_wobble_deg = num();
        else if (key == "ramp_mps2") spec.ramp_mps2 = num();
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(integer());
        else if (key == "origin_lat") spec.origin_lat = num();
        else if (key == "origin_lon") spec.origin_lon = num();
        else if (key == "carriageway_offset_m") spec.carriageway_offset_m = num();
        else if (key == "vertex_spacing_mi") spec.vertex_spacing_mi = num();
        else if (key == "incident_start_mi") { inc.start_mi = num(); has_incident = true; }
        else if (key == "incident_end_mi") { inc.end_mi = num(); has_incident = true; }
        else if (key == "incident_window_start_ms") { inc.window_start_ms = integer(); has_incident = true; }
        else if (key == "incident_window_end_ms") { inc.window_end_ms = integer(); has_incident = true; }
        else if (key == "incident_reduced_speed_mps") { inc.reduced_speed_mps = num(); has_incident = true; }
        else if (key == "incident_queue_mi") { inc.queue_mi = num(); has_incident = true; }
        else {
            throw InputError("InvalidSpec: unknown key '" + key + "' in " + path);
        }
    }
    if (has_incident) spec.incident = inc;
    spec.validate();
    return spec;
}

std::map<Direction, RoutePolyline> build_synth_corridor(const ScenarioSpec& spec) {
    spec.validate();
    const double lat_rad = spec.origin_lat * geo::kDegToRad;
    // Longitude degrees per nominal mile of eastward travel at the origin
    // latitude.
    const double deg_per_mile =
        geo::kMetersPerMile / (geo::kEarthRadiusM * std::cos(lat_rad)) *
        geo::kRadToDeg;
    const int n_edges = std::max(
        1, static_cast<int>(std::ceil(spec.corridor_length_mi /
                                          spec.vertex_spacing_mi -
                                      1e-9)));
    std::vector<geo::LatLon> east;
    east.reserve(static_cast<std::size_t>(n_edges) + 1);
    for (int i = 0; i <= n_edges; ++i) {
        const double mi =
            std::min(i * spec.vertex_spacing_mi, spec.corridor_length_mi);
        east.push_back({spec.origin_lat, spec.origin_lon + mi * deg_per_mile});
    }

    std::map<Direction, RoutePolyline> corridor;
    if (spec.eb) {
        corridor.emplace(Direction::EB, build_polyline(east, Direction::EB));
    }
    if (spec.wb) {
        const double dlat =
            spec.carriageway_offset_m / geo::kEarthRadiusM * geo::kRadToDeg;
        std::vector<geo::LatLon> west(east.rbegin(), east.rend());
        for (auto& p : west) p.lat += dlat;
        corridor.emplace(Direction::WB, build_polyline(west, Direction::WB));
    }
    return corridor;
}

namespace {

double target_speed(const ScenarioSpec& spec, std::int64_t t_ms, double mp_mi) {
    if (spec.incident) {
        const IncidentSpec& inc = *spec.incident;
        const double zone_start = std::max(0.0, inc.start_mi - inc.queue_mi);
        if (t_ms >= inc.window_start_ms && t_ms < inc.window_end_ms &&
            mp_mi >= zone_start && mp_mi <= inc.end_mi) {
            return inc.reduced_speed_mps;
        }
    }
    return spec.cruise_speed_mps;
}

}  // namespace

std::vector<SynthJourney> simulate(
    const ScenarioSpec& spec, const std::map<Direction, RoutePolyline>& corridor) {
    spec.validate();
    const auto dt_ms =
        static_cast<std::int64_t>(std::llround(spec.ping_interval_s * 1000.0));
    if (dt_ms <= 0) {
        throw InputError("InvalidSpec: ping_interval_s rounds to 0 ms");
    }
    const double dt_s = spec.ping_interval_s;
    const auto entry_interval_ms = static_cast<std::int64_t>(
        std::llround(3.6e6 / spec.entry_rate_per_hour));

    std::vector<SynthJourney> out;
    std::uint64_t global_ix = 0;
    for (const Direction dir : {Direction::EB, Direction::WB}) {
        if (!(dir == Direction::EB ? spec.eb : spec.wb)) continue;
        const double route_len = corridor.at(dir).length_mi();
        const double base_heading = dir == Direction::EB ? 90.0 : 270.0;
        for (int g = 0; g < spec.vehicles_per_direction; ++g) {
            SynthJourney j;
            j.id = journey_id(dir, g + 1);
            j.direction = dir;
            // Per-journey stream so generation order never shifts the noise.
            std::mt19937_64 rng(spec.seed +
                                0x9e3779b97f4a7c15ULL * (global_ix + 1));
            std::normal_distribution<double> noise(0.0, 1.0);
            ++global_ix;

            std::int64_t t = spec.start_time_ms + g * entry_interval_ms;
            double mp = spec.entry_milepost_mi;
            double v = target_speed(spec, t, mp);
            std::uint64_t steps = 0;
            while (mp <= route_len) {
                double reported = v;
                if (spec.speed_noise_std_mps > 0.0) {
                    reported =
                        std::max(0.0, v + spec.speed_noise_std_mps * noise(rng));
                }
                const double wobble = (j.pings.size() % 2 == 0)
                                          ? spec.heading_wobble_deg
                                          : -spec.heading_wobble_deg;
                j.pings.push_back({t, mp, v, reported, base_heading + wobble});

                const double target = target_speed(spec, t, mp);
                v = step_toward(v, target, spec.ramp_mps2 * dt_s);
                mp += v * dt_s / geo::kMetersPerMile;
                t += dt_ms;
                if (++steps > 10'000'000ULL) {
                    throw InvariantError(
                        "RunawayJourney: synthetic vehicle failed to exit the "
                        "corridor");
                }
            }
            out.push_back(std::move(j));
        }
    }
    return out;
}

void write_waypoints_csv(const std::string& path,
                         const std::vector<SynthJourney>& journeys,
                         const std::map<Direction, RoutePolyline>& corridor) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    out << "journey_id,timestamp_ms,lat,lon,speed_mps,heading_deg\n";
    for (const SynthJourney& j : journeys) {
        const RoutePolyline& line = corridor.at(j.direction);
        for (const SynthPing& p : j.pings) {
            const geo::LatLon pos = position_at(line, p.milepost_mi);
            out << j.id << "," << p.timestamp_ms << ","
                << util::format_double(pos.lat) << ","
                << util::format_double(pos.lon) << ","
                << util::format_double(p.speed_reported_mps) << ","
                << util::format_double(p.heading_deg) << "\n";
        }
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

void write_route_csv(const std::string& path,
                     const std::map<Direction, RoutePolyline>& corridor) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    out << "direction,lat,lon\n";
    for (const auto& [dir, line] : corridor) {
        for (const geo::LatLon& p : line.vertices) {
            out << to_string(dir) << "," << util::format_double(p.lat) << ","
                << util::format_double(p.lon) << "\n";
        }
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

namespace {

// Oracle-side cell accumulation: plain containers, two-pass variance, no
// pipeline code.
struct OracleCell {
    std::vector<double> speeds;
    std::set<std::string> journey_ids;
    std::uint64_t brakes = 0;
    std::uint64_t high_jerks = 0;
    std::uint64_t hard_accels = 0;
    std::uint64_t hard_brakes = 0;
    double sum_heading_delta = 0.0;
    double sum_fuel = 0.0;
};

}  // namespace

OracleResult oracle_metrics(const ScenarioSpec& spec, const RunConfig& cfg) {
    spec.validate();
    if (spec.speed_noise_std_mps != 0.0) {
        throw InputError(
            "UnsupportedSpec: the oracle is closed-form only for zero speed "
            "noise");
    }
    const auto ping_ms =
        static_cast<std::int64_t>(std::llround(spec.ping_interval_s * 1000.0));
    if (ping_ms > cfg.gap_split_ms) {
        throw InputError(
            "UnsupportedSpec: ping interval exceeds gap_split_ms; journeys "
            "would fragment");
    }

    const auto corridor = build_synth_corridor(spec);
    const auto journeys = simulate(spec, corridor);

    const auto interval_ms =
        static_cast<std::int64_t>(std::llround(cfg.interval_minutes * 60000.0));
    std::int64_t min_t = spec.start_time_ms;
    bool any = false;
    for (const auto& j : journeys) {
        for (const auto& p : j.pings) {
            if (!any || p.timestamp_ms < min_t) min_t = p.timestamp_ms;
            any = true;
        }
    }
    const std::int64_t epoch = cfg.epoch_start_ms
                                   ? *cfg.epoch_start_ms
                                   : floor_div(min_t, interval_ms) * interval_ms;

    const double seg_len = cfg.segment_length_miles;
    std::map<Direction, int> seg_count;
    OracleResult result;
    result.epoch_start_ms = epoch;
    for (const auto& [dir, line] : corridor) {
        result.route_length_mi[dir] = line.length_mi();
        seg_count[dir] = std::max(
            1, static_cast<int>(std::ceil(line.length_mi() / seg_len - 1e-9)));
    }

    const EventThresholds& th = cfg.thresholds;
    const FuelParams& fp = cfg.fuel;
    std::map<std::tuple<Direction, std::int32_t, std::int32_t>, OracleCell> cells;

    for (const SynthJourney& j : journeys) {
        double prev_accel = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < j.pings.size(); ++i) {
            const SynthPing& p = j.pings[i];
            const double v = p.speed_reported_mps;

            double accel = std::numeric_limits<double>::quiet_NaN();
            double jerk = std::numeric_limits<double>::quiet_NaN();
            double heading_delta = std::numeric_limits<double>::quiet_NaN();
            double fuel = 0.0;
            if (i > 0) {
                const std::int64_t dt_int =
                    p.timestamp_ms - j.pings[i - 1].timestamp_ms;
                if (dt_int > 0 && dt_int <= th.max_dt_ms) {
                    const double dt = static_cast<double>(dt_int) / 1000.0;
                    accel = (v - j.pings[i - 1].speed_reported_mps) / dt;
                    if (!std::isnan(prev_accel)) jerk = (accel - prev_accel) / dt;
                    double dh = std::abs(p.heading_deg - j.pings[i - 1].heading_deg);
                    dh = std::fmod(dh, 360.0);
                    heading_delta = std::min(dh, 360.0 - dh);
                    // Direct polynomial evaluation, deliberately not Horner.
                    const double cruise =
                        fp.b0 + fp.b1 * v + fp.b2 * (v * v) + fp.b3 * (v * v * v);
                    const double a_pos = accel > 0.0 ? accel : 0.0;
                    fuel = (cruise +
                            a_pos * (fp.c0 + fp.c1 * v + fp.c2 * (v * v))) *
                           dt;
                }
            }
            prev_accel = accel;

            if (p.timestamp_ms < epoch) continue;

            // Exactness guard: a ping this close to a segment boundary could
            // legitimately bin either way after projection round-off.
            const double r = std::fmod(p.milepost_mi, seg_len);
            if (std::min(r, seg_len - r) < 1e-6) {
                throw InputError(
                    "UnsupportedSpec: ping within 1e-6 mi of a segment "
                    "boundary at milepost " +
                    util::format_double(p.milepost_mi));
            }
            int seg = static_cast<int>(p.milepost_mi / seg_len);
            if (seg >= seg_count.at(j.direction)) seg = seg_count.at(j.direction) - 1;
            const auto interval = static_cast<std::int32_t>(
                (p.timestamp_ms - epoch) / interval_ms);

            OracleCell& cell = cells[{j.direction, seg, interval}];
            cell.speeds.push_back(v);
            cell.journey_ids.insert(j.id);
            if (!std::isnan(accel)) {
                if (accel <= th.brake_accel_max) ++cell.brakes;
                if (accel <= th.hard_brake_max) ++cell.hard_brakes;
                if (accel >= th.hard_accel_min) ++cell.hard_accels;
            }
            if (!std::isnan(jerk) &&
                (jerk >= th.jerk_pos_min || jerk <= th.jerk_neg_max)) {
                ++cell.high_jerks;
            }
            if (!std::isnan(heading_delta)) cell.sum_heading_delta += heading_delta;
            cell.sum_fuel += fuel;
        }
    }

    for (const auto& [key, cell] : cells) {
        CellMetrics m;
        m.key = {std::get<0>(key), std::get<1>(key), std::get<2>(key)};
        m.n_vehicles = static_cast<std::uint32_t>(cell.journey_ids.size());
        m.n_waypoints = cell.speeds.size();
        const double n = static_cast<double>(cell.speeds.size());
        double sum = 0.0;
        for (double s : cell.speeds) sum += s;
        m.mean_speed_mps = sum / n;
        double ss = 0.0;
        for (double s : cell.speeds) {
            ss += (s - m.mean_speed_mps) * (s - m.mean_speed_mps);
        }
        m.std_speed_mps = std::sqrt(ss / n);
        m.waypoints_per_vehicle = n / static_cast<double>(m.n_vehicles);
        m.pct_brakes = static_cast<double>(cell.brakes) / n;
        m.pct_high_jerk = static_cast<double>(cell.high_jerks) / n;
        m.hard_accel_count = cell.hard_accels;
        m.hard_brake_count = cell.hard_brakes;
        m.avg_heading_change =
            (cell.sum_heading_delta / 360.0) / static_cast<double>(m.n_vehicles);
        m.avg_fuel_ml_per_veh = cell.sum_fuel / static_cast<double>(m.n_vehicles);
        result.cells.push_back(std::move(m));
    }
    return result;
}

}  // namespace tprof
