#include "tprof/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "tprof/errors.hpp"

namespace tprof {

IntervalScheme IntervalScheme::from_minutes(std::int64_t epoch_start_ms,
                                            double interval_minutes) {
    if (!(interval_minutes > 0.0)) {
        throw ConfigError("InvalidInterval: interval_minutes must be > 0, got " +
                          std::to_string(interval_minutes));
    }
    const double ms = interval_minutes * 60000.0;
    const auto interval_ms = static_cast<std::int64_t>(std::llround(ms));
    if (interval_ms <= 0 || std::abs(ms - static_cast<double>(interval_ms)) > 1e-6) {
        throw ConfigError(
            "InvalidInterval: interval_minutes must be a whole number of "
            "milliseconds, got " +
            std::to_string(interval_minutes));
    }
    return IntervalScheme{epoch_start_ms, interval_ms};
}

std::int32_t IntervalScheme::interval_of(std::int64_t timestamp_ms) const {
    if (timestamp_ms < epoch_start_ms) {
        throw InputError("TimestampBeforeEpoch: timestamp " +
                         std::to_string(timestamp_ms) + " precedes epoch " +
                         std::to_string(epoch_start_ms));
    }
    return static_cast<std::int32_t>((timestamp_ms - epoch_start_ms) / interval_ms);
}

CellKey assign_cell(const KinematicSample& s, const IntervalScheme& scheme) {
    return CellKey{s.direction, s.segment, scheme.interval_of(s.timestamp_ms)};
}

void CellAccumulator::add(const KinematicSample& s) {
    ++waypoints;
    sum_speed += s.speed_mps;
    sum_speed_sq += s.speed_mps * s.speed_mps;
    if (s.flags & kernels::flag::kBrake) ++brake_count;
    if (s.flags & kernels::flag::kHighJerk) ++high_jerk_count;
    if (s.flags & kernels::flag::kHardBrake) ++hard_brake_count;
    if (s.flags & kernels::flag::kHardAccel) ++hard_accel_count;
    if (s.has_heading_delta()) sum_heading_delta_deg += s.heading_delta_deg;
    sum_fuel_ml += s.fuel_ml;
    journeys.insert(s.journey_ix);
}

void CellAccumulator::merge_from(const CellAccumulator& other) {
    waypoints += other.waypoints;
    sum_speed += other.sum_speed;
    sum_speed_sq += other.sum_speed_sq;
    brake_count += other.brake_count;
    high_jerk_count += other.high_jerk_count;
    hard_brake_count += other.hard_brake_count;
    hard_accel_count += other.hard_accel_count;
    sum_heading_delta_deg += other.sum_heading_delta_deg;
    sum_fuel_ml += other.sum_fuel_ml;
    journeys.insert(other.journeys.begin(), other.journeys.end());
}

CellMetrics finalize(const CellKey& key, const CellAccumulator& acc) {
    if (acc.waypoints == 0) {
        throw InvariantError("EmptyCell: finalize called on a cell with no waypoints");
    }
    CellMetrics m;
    m.key = key;
    m.n_vehicles = static_cast<std::uint32_t>(acc.journeys.size());
    m.n_waypoints = acc.waypoints;
    const double n = static_cast<double>(acc.waypoints);
    m.mean_speed_mps = acc.sum_speed / n;
    // Population variance from the two power sums. Recursive summation puts
    // the roundoff of (sum_sq/n - mean^2) within ~3n*eps*mean_sq of the true
    // value, so anything under an 8n*eps*mean_sq floor is numerical noise,
    // not signal: clamp it (and genuine negatives) to exactly zero so
    // constant-speed cells report sigma = 0.
    const double mean_sq = acc.sum_speed_sq / n;
    const double var = mean_sq - m.mean_speed_mps * m.mean_speed_mps;
    const double noise_floor =
        8.0 * std::numeric_limits<double>::epsilon() * n * mean_sq;
    m.std_speed_mps = var > noise_floor ? std::sqrt(var) : 0.0;
    m.waypoints_per_vehicle = n / static_cast<double>(m.n_vehicles);
    m.pct_brakes = static_cast<double>(acc.brake_count) / n;
    m.pct_high_jerk = static_cast<double>(acc.high_jerk_count) / n;
    m.hard_accel_count = acc.hard_accel_count;
    m.hard_brake_count = acc.hard_brake_count;
    m.avg_heading_change =
        (acc.sum_heading_delta_deg / 360.0) / static_cast<double>(m.n_vehicles);
    m.avg_fuel_ml_per_veh = acc.sum_fuel_ml / static_cast<double>(m.n_vehicles);
    return m;
}

void CellMap::add(const KinematicSample& s, const IntervalScheme& scheme) {
    cells_[assign_cell(s, scheme)].add(s);
}

void CellMap::merge_from(const CellMap& other) {
    for (const auto& [key, acc] : other.cells_) {
        cells_[key].merge_from(acc);
    }
}

std::vector<CellMetrics> CellMap::finalize_sorted() const {
    std::vector<CellMetrics> out;
    out.reserve(cells_.size());
    for (const auto& [key, acc] : cells_) {
        out.push_back(finalize(key, acc));
    }
    std::sort(out.begin(), out.end(), [](const CellMetrics& a, const CellMetrics& b) {
        return a.sort_key() < b.sort_key();
    });
    return out;
}

std::uint64_t CellMap::total_waypoints() const {
    std::uint64_t n = 0;
    for (const auto& [key, acc] : cells_) n += acc.waypoints;
    return n;
}

namespace {

// Accumulate one journey's samples into `map`, counting pre-epoch skips.
void accumulate_journey(const std::vector<KinematicSample>& samples,
                        const IntervalScheme& scheme, CellMap& map,
                        std::uint64_t& pre_epoch) {
    for (const KinematicSample& s : samples) {
        if (s.timestamp_ms < scheme.epoch_start_ms) {
            ++pre_epoch;
            continue;
        }
        map.add(s, scheme);
    }
}

}  // namespace

AggregateResult aggregate_samples(
    const std::vector<std::vector<KinematicSample>>& per_journey,
    const IntervalScheme& scheme, const AggregateOptions& opts) {
    AggregateResult result;

    const int threads = std::max(1, opts.threads);
    if (opts.deterministic || threads == 1 || per_journey.size() < 2) {
        for (const auto& samples : per_journey) {
            accumulate_journey(samples, scheme, result.cells,
                               result.pre_epoch_samples);
        }
        return result;
    }

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), per_journey.size());
    std::vector<CellMap> maps(n_workers);
    std::vector<std::uint64_t> skips(n_workers, 0);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            // Static stride partition: worker w owns journeys w, w+W, w+2W, ...
            for (std::size_t j = w; j < per_journey.size(); j += n_workers) {
                accumulate_journey(per_journey[j], scheme, maps[w], skips[w]);
            }
        });
    }
    for (auto& t : pool) t.join();

    for (std::size_t w = 0; w < n_workers; ++w) {
        result.cells.merge_from(maps[w]);
        result.pre_epoch_samples += skips[w];
    }
    return result;
}

}  // namespace tprof
