#include "tprof/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "tprof/errors.hpp"
#include "tprof/indices.hpp"
#include "tprof/kinematics.hpp"
#include "tprof/util.hpp"

namespace tprof {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

// Matches one journey against the corridor and derives its kinematic
// samples. Off-route pings are dropped (counted); the kinematic chain gates
// on dt, so a dropped middle ping widens dt rather than fabricating one.
void process_journey(const Journey& journey, std::uint32_t journey_ix,
                     const CorridorModel& model, const RunConfig& cfg,
                     std::vector<KinematicSample>& out,
                     std::uint64_t& off_route) {
    MatchedJourney matched;
    matched.journey_ix = journey_ix;
    matched.pings.reserve(journey.pings.size());
    for (const Ping& p : journey.pings) {
        const auto hit =
            model.match({p.lat, p.lon}, p.heading_deg, cfg.max_offset_m);
        if (!hit) {
            ++off_route;
            continue;
        }
        matched.pings.push_back({p.timestamp_ms, hit->milepost_mi,
                                 static_cast<std::int32_t>(hit->segment),
                                 hit->direction, p.speed_mps, p.heading_deg});
    }
    derive_kinematics_into(matched, cfg.thresholds, out);
    attach_fuel(out, cfg.fuel);
}

}  // namespace

ProfileResult run_profile_records(std::vector<WaypointRecord> records,
                                  std::size_t data_lines,
                                  std::size_t rejected_lines,
                                  const std::map<Direction, RoutePolyline>& lines,
                                  const RunConfig& cfg, int threads) {
    cfg.validate();
    const CorridorModel model(lines, cfg.segment_length_miles);

    ProfileResult result;
    result.stats.data_lines = data_lines;
    result.stats.records = records.size();
    result.stats.rejected_lines = rejected_lines;

    // Epoch: explicit, or the earliest record's timestamp floored to an
    // interval boundary so interval 0 is never empty.
    const auto interval_ms =
        static_cast<std::int64_t>(std::llround(cfg.interval_minutes * 60000.0));
    std::int64_t epoch = cfg.epoch_start_ms.value_or(0);
    if (!cfg.epoch_start_ms && !records.empty()) {
        std::int64_t min_t = records.front().timestamp_ms;
        for (const auto& r : records) min_t = std::min(min_t, r.timestamp_ms);
        epoch = floor_div(min_t, interval_ms) * interval_ms;
    }
    result.stats.epoch_start_ms = epoch;

    const std::vector<Journey> journeys =
        assemble_journeys(std::move(records), cfg.gap_split_ms);
    result.stats.journeys = journeys.size();
    for (const Journey& j : journeys) {
        if (j.id.find('~') != std::string::npos) ++result.stats.split_parts;
    }

    // Match + kinematics: per-journey outputs land at fixed indices, so any
    // thread count produces the identical sample set.
    std::vector<std::vector<KinematicSample>> per_journey(journeys.size());
    std::uint64_t off_route = 0;
    const int n_workers = std::clamp<int>(threads, 1,
                                          static_cast<int>(std::max<std::size_t>(
                                              journeys.size(), 1)));
    if (n_workers <= 1) {
        for (std::size_t j = 0; j < journeys.size(); ++j) {
            process_journey(journeys[j], static_cast<std::uint32_t>(j), model,
                            cfg, per_journey[j], off_route);
        }
    } else {
        std::vector<std::uint64_t> off_counts(
            static_cast<std::size_t>(n_workers), 0);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t j = static_cast<std::size_t>(w);
                     j < journeys.size();
                     j += static_cast<std::size_t>(n_workers)) {
                    process_journey(journeys[j], static_cast<std::uint32_t>(j),
                                    model, cfg, per_journey[j],
                                    off_counts[static_cast<std::size_t>(w)]);
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto c : off_counts) off_route += c;
    }
    result.stats.off_route = off_route;
    for (const auto& samples : per_journey) {
        result.stats.matched_samples += samples.size();
    }

    const IntervalScheme scheme{epoch, interval_ms};
    const AggregateResult agg = aggregate_samples(
        per_journey, scheme, {threads, cfg.deterministic_mode});
    result.stats.pre_epoch = agg.pre_epoch_samples;
    result.stats.cells = agg.cells.cell_count();

    // Conservation: every matched sample is either pre-epoch or in a cell.
    if (agg.cells.total_waypoints() + agg.pre_epoch_samples !=
        result.stats.matched_samples) {
        throw InvariantError(
            "SampleConservation: cell totals plus pre-epoch skips do not "
            "equal matched samples");
    }

    result.cells = agg.cells.finalize_sorted();

    result.meta["segment_length_miles"] =
        util::format_double(cfg.segment_length_miles);
    result.meta["interval_minutes"] = util::format_double(cfg.interval_minutes);
    result.meta["epoch_start_ms"] = std::to_string(epoch);
    for (const auto& [dir, line] : lines) {
        result.meta[dir == Direction::EB ? "route_length_miles_eb"
                                         : "route_length_miles_wb"] =
            util::format_double(line.length_mi());
    }
    return result;
}

ProfileResult run_profile(const std::string& waypoints_path,
                          const std::string& route_path, const RunConfig& cfg,
                          int threads) {
    ParseResult parsed = parse_waypoints_file(waypoints_path);
    const auto lines = load_route_file(route_path);
    return run_profile_records(std::move(parsed.records), parsed.data_lines,
                               parsed.rejects.size(), lines, cfg, threads);
}

}  // namespace tprof
