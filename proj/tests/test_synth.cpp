#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tprof/errors.hpp"
#include "tprof/geo.hpp"
#include "tprof/ingest.hpp"
#include "tprof/synth.hpp"

using namespace tprof;
using test::TempDir;
using test::write_file;

namespace {

ScenarioSpec small_cruise_spec() {
    ScenarioSpec spec;
    spec.corridor_length_mi = 2.0;
    spec.vehicles_per_direction = 4;
    return spec;
}

bool journeys_identical(const std::vector<SynthJourney>& a,
                        const std::vector<SynthJourney>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id || a[i].direction != b[i].direction ||
            a[i].pings.size() != b[i].pings.size()) {
            return false;
        }
        for (std::size_t k = 0; k < a[i].pings.size(); ++k) {
            const SynthPing& p = a[i].pings[k];
            const SynthPing& q = b[i].pings[k];
            if (p.timestamp_ms != q.timestamp_ms ||
                p.milepost_mi != q.milepost_mi ||
                p.speed_true_mps != q.speed_true_mps ||
                p.speed_reported_mps != q.speed_reported_mps ||
                p.heading_deg != q.heading_deg) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("simulate: bit-for-bit deterministic, including noisy specs") {
    auto spec = small_cruise_spec();
    spec.speed_noise_std_mps = 0.8;
    spec.heading_wobble_deg = 2.0;
    spec.wb = true;
    const auto corridor = build_synth_corridor(spec);
    const auto first = simulate(spec, corridor);
    const auto second = simulate(spec, corridor);
    CHECK(journeys_identical(first, second));
    CHECK_FALSE(first.empty());
}

TEST_CASE("simulate: canonical journey order and one-based ids") {
    auto spec = small_cruise_spec();
    spec.wb = true;
    spec.vehicles_per_direction = 3;
    const auto journeys = simulate(spec, build_synth_corridor(spec));
    REQUIRE(journeys.size() == 6);
    CHECK(journeys[0].id == "EB-000001");
    CHECK(journeys[1].id == "EB-000002");
    CHECK(journeys[2].id == "EB-000003");
    CHECK(journeys[3].id == "WB-000001");
    CHECK(journeys[5].id == "WB-000003");
    CHECK(journeys[0].direction == Direction::EB);
    CHECK(journeys[3].direction == Direction::WB);
}

TEST_CASE("simulate: zero vehicles produce an empty, well-formed run") {
    TempDir tmp;
    auto spec = small_cruise_spec();
    spec.vehicles_per_direction = 0;
    const auto corridor = build_synth_corridor(spec);
    const auto journeys = simulate(spec, corridor);
    CHECK(journeys.empty());
    const std::string path = tmp.file("empty.csv");
    write_waypoints_csv(path, journeys, corridor);
    const auto parsed = parse_waypoints_file(path);
    CHECK(parsed.records.empty());
    CHECK(parsed.data_lines == 0);
}

TEST_CASE("simulate: cruise pings advance on an exact space-time lattice") {
    const auto spec = small_cruise_spec();  // 26.8224 m/s, 3 s pings
    const auto journeys = simulate(spec, build_synth_corridor(spec));
    REQUIRE(journeys.size() == 4);

    const double step_mi = 26.8224 * 3.0 / geo::kMetersPerMile;
    const std::int64_t entry_ms = 5000;  // 720 vehicles/hour
    for (std::size_t g = 0; g < journeys.size(); ++g) {
        const auto& pings = journeys[g].pings;
        REQUIRE(!pings.empty());
        CHECK(pings[0].timestamp_ms ==
              spec.start_time_ms + static_cast<std::int64_t>(g) * entry_ms);
        CHECK(pings[0].milepost_mi == spec.entry_milepost_mi);
        for (std::size_t i = 0; i < pings.size(); ++i) {
            CHECK(pings[i].speed_true_mps == 26.8224);
            CHECK(pings[i].speed_reported_mps == 26.8224);
            CHECK(pings[i].heading_deg == 90.0);
            if (i > 0) {
                CHECK(pings[i].timestamp_ms == pings[i - 1].timestamp_ms + 3000);
                CHECK(pings[i].milepost_mi == pings[i - 1].milepost_mi + step_mi);
            }
        }
        // The final ping is the last one at or before the route end.
        CHECK(pings.back().milepost_mi <= spec.corridor_length_mi);
        CHECK(pings.back().milepost_mi + step_mi > spec.corridor_length_mi);
    }
}

TEST_CASE("build_synth_corridor: straight east line with a northern twin") {
    auto spec = small_cruise_spec();
    spec.wb = true;
    const auto corridor = build_synth_corridor(spec);
    REQUIRE(corridor.count(Direction::EB) == 1);
    REQUIRE(corridor.count(Direction::WB) == 1);
    const auto& eb = corridor.at(Direction::EB);
    const auto& wb = corridor.at(Direction::WB);

    CHECK(eb.length_mi() == doctest::Approx(2.0).epsilon(1e-6));
    // The WB carriageway sits 20 m north, where east-west miles are a hair
    // shorter (the metric scales with cos of latitude).
    CHECK(wb.length_mi() == doctest::Approx(2.0).epsilon(1e-5));
    for (std::size_t i = 1; i < eb.vertices.size(); ++i) {
        CHECK(eb.vertices[i].lon > eb.vertices[i - 1].lon);
        CHECK(eb.vertices[i].lat == eb.vertices[0].lat);
    }
    // WB starts where EB ends, runs west, and sits ~20 m north.
    CHECK(wb.vertices.front().lon == eb.vertices.back().lon);
    CHECK(wb.vertices.back().lon == eb.vertices.front().lon);
    const double dlat_m = (wb.vertices[0].lat - eb.vertices[0].lat) *
                          geo::kDegToRad * geo::kEarthRadiusM;
    CHECK(dlat_m == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("waypoint CSV: speeds and timestamps round-trip exactly") {
    TempDir tmp;
    auto spec = small_cruise_spec();
    spec.speed_noise_std_mps = 0.5;  // awkward reported values
    spec.vehicles_per_direction = 3;
    const auto corridor = build_synth_corridor(spec);
    const auto journeys = simulate(spec, corridor);
    const std::string path = tmp.file("pings.csv");
    write_waypoints_csv(path, journeys, corridor);

    const auto parsed = parse_waypoints_file(path);
    CHECK(parsed.rejects.empty());
    std::size_t total = 0;
    for (const auto& j : journeys) total += j.pings.size();
    REQUIRE(parsed.records.size() == total);

    std::size_t r = 0;
    for (const auto& j : journeys) {
        const auto& line = corridor.at(j.direction);
        for (const auto& p : j.pings) {
            const auto& rec = parsed.records[r++];
            CHECK(rec.journey_id == j.id);
            CHECK(rec.timestamp_ms == p.timestamp_ms);
            CHECK(rec.speed_mps == p.speed_reported_mps);
            CHECK(rec.heading_deg == p.heading_deg);
            const geo::LatLon pos = position_at(line, p.milepost_mi);
            CHECK(rec.lat == pos.lat);
            CHECK(rec.lon == pos.lon);
        }
    }
}

TEST_CASE("route CSV from a corridor loads back with the same vertices") {
    TempDir tmp;
    auto spec = small_cruise_spec();
    spec.wb = true;
    const auto corridor = build_synth_corridor(spec);
    const std::string path = tmp.file("route.csv");
    write_route_csv(path, corridor);
    const auto loaded = load_route_file(path);
    REQUIRE(loaded.size() == 2);
    for (const auto& [dir, line] : corridor) {
        const auto& got = loaded.at(dir);
        REQUIRE(got.vertices.size() == line.vertices.size());
        for (std::size_t i = 0; i < line.vertices.size(); ++i) {
            CHECK(got.vertices[i].lat == line.vertices[i].lat);
            CHECK(got.vertices[i].lon == line.vertices[i].lon);
        }
    }
}

TEST_CASE("incident: speeds ramp down, hold the reduced speed, and recover") {
    ScenarioSpec spec;
    spec.corridor_length_mi = 3.0;
    spec.vehicles_per_direction = 1;
    IncidentSpec inc;
    inc.start_mi = 2.0;
    inc.end_mi = 2.5;
    inc.queue_mi = 0.5;  // slow zone starts at milepost 1.5
    inc.window_start_ms = spec.start_time_ms;
    inc.window_end_ms = spec.start_time_ms + 3'600'000;
    spec.incident = inc;

    const auto journeys = simulate(spec, build_synth_corridor(spec));
    REQUIRE(journeys.size() == 1);
    const auto& pings = journeys[0].pings;

    double min_v = spec.cruise_speed_mps;
    bool held_reduced = false;
    for (std::size_t i = 0; i < pings.size(); ++i) {
        min_v = std::min(min_v, pings[i].speed_true_mps);
        if (i > 0) {
            const double dv =
                std::fabs(pings[i].speed_true_mps - pings[i - 1].speed_true_mps);
            CHECK(dv <= spec.ramp_mps2 * 3.0 + 1e-12);
        }
        if (pings[i].speed_true_mps == inc.reduced_speed_mps &&
            pings[i].milepost_mi > 1.5 && pings[i].milepost_mi < 2.5) {
            held_reduced = true;
        }
    }
    CHECK(min_v == inc.reduced_speed_mps);  // step_toward lands exactly
    CHECK(held_reduced);
    CHECK(pings.back().speed_true_mps == spec.cruise_speed_mps);  // recovered
}

TEST_CASE("incident: vehicles outside the time window never slow down") {
    ScenarioSpec spec;
    spec.corridor_length_mi = 2.0;
    spec.vehicles_per_direction = 2;
    IncidentSpec inc;
    inc.start_mi = 1.0;
    inc.end_mi = 1.5;
    inc.queue_mi = 0.0;
    // The window closes before the run starts.
    inc.window_start_ms = spec.start_time_ms - 7'200'000;
    inc.window_end_ms = spec.start_time_ms - 3'600'000;
    spec.incident = inc;
    const auto journeys = simulate(spec, build_synth_corridor(spec));
    for (const auto& j : journeys) {
        for (const auto& p : j.pings) {
            CHECK(p.speed_true_mps == spec.cruise_speed_mps);
        }
    }
}

TEST_CASE("oracle: steady cruise fills every cell with exactly 10 waypoints") {
    ScenarioSpec spec;  // 6 mi, 10 vehicles, 60 mph, 3 s pings
    RunConfig cfg;
    const auto oracle = oracle_metrics(spec, cfg);
    CHECK(oracle.epoch_start_ms == spec.start_time_ms);  // already on a boundary
    REQUIRE(oracle.cells.size() == 12);  // 12 half-mile segments, one interval
    for (const auto& m : oracle.cells) {
        CHECK(m.key.direction == Direction::EB);
        CHECK(m.key.interval == 0);
        CHECK(m.n_vehicles == 10);
        CHECK(m.n_waypoints == 100);
        CHECK(m.waypoints_per_vehicle == 10.0);
        // The oracle's two-pass mean over 100 equal speeds carries a few ulp
        // of summation noise, so exact equality is out of reach by design.
        CHECK(test::rel_close(m.mean_speed_mps, 26.8224, 1e-12));
        CHECK(std::fabs(m.std_speed_mps) < 1e-12);
        CHECK(m.pct_brakes == 0.0);
        CHECK(m.pct_high_jerk == 0.0);
        CHECK(m.hard_accel_count == 0);
        CHECK(m.hard_brake_count == 0);
        CHECK(m.avg_heading_change == 0.0);
        CHECK(m.avg_fuel_ml_per_veh > 0.0);
    }
}

TEST_CASE("oracle: refuses specs it cannot be exact about") {
    RunConfig cfg;

    ScenarioSpec noisy;
    noisy.speed_noise_std_mps = 0.5;
    CHECK_THROWS_WITH_AS(oracle_metrics(noisy, cfg),
                         doctest::Contains("UnsupportedSpec"), InputError);

    ScenarioSpec sparse;
    sparse.ping_interval_s = 40.0;  // beyond the 30 s gap-split default
    CHECK_THROWS_WITH_AS(oracle_metrics(sparse, cfg),
                         doctest::Contains("gap_split_ms"), InputError);

    ScenarioSpec on_boundary;
    on_boundary.entry_milepost_mi = 0.0;  // first ping exactly on a boundary
    CHECK_THROWS_WITH_AS(oracle_metrics(on_boundary, cfg),
                         doctest::Contains("segment boundary"), InputError);
}

TEST_CASE("load_scenario: key-value file with incident block") {
    TempDir tmp;
    const std::string path = tmp.file("scenario.conf");
    write_file(path,
               "# rush-hour incident fixture\n"
               "corridor_length_mi = 6\n"
               "eb = true\n"
               "wb = true\n"
               "vehicles_per_direction = 40\n"
               "entry_rate_per_hour = 900\n"
               "start_time_ms = 1622505600000\n"
               "cruise_speed_mps = 26.8224\n"
               "seed = 42\n"
               "incident_start_mi = 4.0\n"
               "incident_end_mi = 4.5\n"
               "incident_window_start_ms = 1622505600000\n"
               "incident_window_end_ms = 1622509200000\n"
               "incident_reduced_speed_mps = 4.4704\n"
               "incident_queue_mi = 2\n");
    const ScenarioSpec spec = load_scenario(path);
    CHECK(spec.corridor_length_mi == 6.0);
    CHECK(spec.wb);
    CHECK(spec.vehicles_per_direction == 40);
    CHECK(spec.entry_rate_per_hour == 900.0);
    CHECK(spec.seed == 42);
    REQUIRE(spec.incident.has_value());
    CHECK(spec.incident->start_mi == 4.0);
    CHECK(spec.incident->queue_mi == 2.0);
    CHECK(spec.incident->window_end_ms == 1622509200000LL);
}

TEST_CASE("load_scenario: no incident keys leaves the incident unset") {
    TempDir tmp;
    const std::string path = tmp.file("plain.conf");
    write_file(path, "corridor_length_mi = 2\nvehicles_per_direction = 5\n");
    CHECK_FALSE(load_scenario(path).incident.has_value());
}

TEST_CASE("load_scenario: unknown keys and bad values are input errors") {
    TempDir tmp;
    const std::string unknown = tmp.file("unknown.conf");
    write_file(unknown, "corridor_len_mi = 6\n");
    CHECK_THROWS_WITH_AS(load_scenario(unknown),
                         doctest::Contains("unknown key"), InputError);

    const std::string bad = tmp.file("bad.conf");
    write_file(bad, "vehicles_per_direction = several\n");
    CHECK_THROWS_WITH_AS(load_scenario(bad), doctest::Contains("cannot parse"),
                         InputError);
}

TEST_CASE("ScenarioSpec::validate rejects impossible runs") {
    auto expect_invalid = [](void (*mutate)(ScenarioSpec&), const char* what) {
        ScenarioSpec spec;
        mutate(spec);
        CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains(what),
                             InputError);
    };
    expect_invalid([](ScenarioSpec& s) { s.eb = s.wb = false; },
                   "at least one");
    expect_invalid([](ScenarioSpec& s) { s.corridor_length_mi = 0.0; },
                   "corridor_length_mi");
    expect_invalid([](ScenarioSpec& s) { s.vehicles_per_direction = -1; },
                   "vehicles_per_direction");
    expect_invalid([](ScenarioSpec& s) { s.entry_milepost_mi = 99.0; },
                   "entry_milepost_mi");
    expect_invalid([](ScenarioSpec& s) { s.heading_wobble_deg = 95.0; },
                   "heading_wobble_deg");
    expect_invalid([](ScenarioSpec& s) { s.ramp_mps2 = 0.0; }, "ramp_mps2");
    expect_invalid(
        [](ScenarioSpec& s) {
            s.incident = IncidentSpec{};
            s.incident->window_start_ms = 10;
            s.incident->window_end_ms = 10;
        },
        "incident window");
    expect_invalid(
        [](ScenarioSpec& s) {
            s.incident = IncidentSpec{};
            s.incident->start_mi = 5.0;
            s.incident->end_mi = 4.0;
            s.incident->window_end_ms = 1;
        },
        "incident range");
}
