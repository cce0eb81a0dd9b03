#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tprof/aggregate.hpp"
#include "tprof/config.hpp"
#include "tprof/route.hpp"

namespace tprof {

// A capacity drop on the corridor: vehicles inside the spatial footprint
// during the time window slow to the reduced speed, including a queue
// extending upstream of the incident location.
struct IncidentSpec {
    double start_mi = 0.0;
    double end_mi = 0.0;
    std::int64_t window_start_ms = 0;
    std::int64_t window_end_ms = 0;  // half-open [start, end)
    double reduced_speed_mps = 4.4704;  // 10 mph
    double queue_mi = 2.0;
};

// A deterministic synthetic corridor run. Vehicles follow prescribed speed
// profiles (no car-following); every kinematic quantity is therefore known
// in closed form, which is what makes the oracle possible.
struct ScenarioSpec {
    double corridor_length_mi = 6.0;
    bool eb = true;
    bool wb = false;
    int vehicles_per_direction = 10;
    double entry_rate_per_hour = 720.0;  // one entry each 5 s
    std::int64_t start_time_ms = 1622505600000;  // 2021-06-01 00:00 UTC
    // Entry milepost offset keeps pings clear of segment boundaries so cell
    // occupancy is exact rather than a coin flip on the last ulp.
    double entry_milepost_mi = 0.0137;
    double cruise_speed_mps = 26.8224;  // 60 mph
    double ping_interval_s = 3.0;
    double speed_noise_std_mps = 0.0;  // reported speed only
    double heading_wobble_deg = 0.0;   // alternating +/- around the bearing
    double ramp_mps2 = 3.0;  // fixed speed-change rate into/out of incidents
    std::uint64_t seed = 1;
    std::optional<IncidentSpec> incident;

    // Corridor shape: a straight due-east carriageway pair near the origin,
    // westbound offset a fixed distance north.
    double origin_lat = 40.70;
    double origin_lon = -74.20;
    double carriageway_offset_m = 20.0;
    double vertex_spacing_mi = 0.1;

    // Throws InputError (InvalidSpec) on out-of-range fields.
    void validate() const;
};

// Flat key-value scenario file; unknown keys are errors.
ScenarioSpec load_scenario(const std::string& path);

// EB runs west-to-east along the origin latitude; WB is the reverse
// carriageway offset north. Mileposts are the polylines' own arc lengths.
std::map<Direction, RoutePolyline> build_synth_corridor(const ScenarioSpec& spec);

struct SynthPing {
    std::int64_t timestamp_ms = 0;
    double milepost_mi = 0.0;
    double speed_true_mps = 0.0;
    double speed_reported_mps = 0.0;
    double heading_deg = 0.0;
};

struct SynthJourney {
    std::string id;
    Direction direction = Direction::EB;
    std::vector<SynthPing> pings;
};

// All journeys in canonical order (EB by entry index, then WB). Determinism:
// same spec, same output, bit for bit.
std::vector<SynthJourney> simulate(const ScenarioSpec& spec,
                                   const std::map<Direction, RoutePolyline>& corridor);

void write_waypoints_csv(const std::string& path,
                         const std::vector<SynthJourney>& journeys,
                         const std::map<Direction, RoutePolyline>& corridor);
void write_route_csv(const std::string& path,
                     const std::map<Direction, RoutePolyline>& corridor);

struct OracleResult {
    std::vector<CellMetrics> cells;  // canonical order
    std::int64_t epoch_start_ms = 0;
    std::map<Direction, double> route_length_mi;
};

// Expected per-cell metrics computed straight from the spec's trajectories:
// finite differences, direct threshold tests, direct fuel polynomial, and
// two-pass variance — none of the pipeline's matching or accumulator code.
// Throws InputError (UnsupportedSpec) for noisy specs and for trajectories
// that land within 1e-6 mi of a segment boundary (exactness not claimable).
OracleResult oracle_metrics(const ScenarioSpec& spec, const RunConfig& cfg);

}  // namespace tprof
