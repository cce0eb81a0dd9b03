#pragma once

#include <compare>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tprof/kinematics.hpp"
#include "tprof/route.hpp"

namespace tprof {

struct CellKey {
    Direction direction = Direction::EB;
    std::int32_t segment = 0;
    std::int32_t interval = 0;

    auto operator<=>(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = (static_cast<std::uint64_t>(k.direction) << 62) ^
                          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(
                               k.segment))
                           << 31) ^
                          static_cast<std::uint32_t>(k.interval);
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h);
    }
};

// Left-closed study intervals of fixed length from an epoch.
struct IntervalScheme {
    std::int64_t epoch_start_ms = 0;
    std::int64_t interval_ms = 30 * 60000;

    static IntervalScheme from_minutes(std::int64_t epoch_start_ms,
                                       double interval_minutes);

    // Throws InputError (TimestampBeforeEpoch) for pre-epoch stamps.
    std::int32_t interval_of(std::int64_t timestamp_ms) const;
};

CellKey assign_cell(const KinematicSample& s, const IntervalScheme& scheme);

// Mergeable partial sums for one cell. Distinct-journey counting is exact.
struct CellAccumulator {
    std::uint64_t waypoints = 0;
    double sum_speed = 0.0;
    double sum_speed_sq = 0.0;
    std::uint64_t brake_count = 0;
    std::uint64_t high_jerk_count = 0;
    std::uint64_t hard_brake_count = 0;
    std::uint64_t hard_accel_count = 0;
    double sum_heading_delta_deg = 0.0;
    double sum_fuel_ml = 0.0;
    std::unordered_set<std::uint32_t> journeys;

    void add(const KinematicSample& s);
    void merge_from(const CellAccumulator& other);
};

// Finalized per-cell measurements.
struct CellMetrics {
    CellKey key;
    std::uint32_t n_vehicles = 0;
    std::uint64_t n_waypoints = 0;
    double mean_speed_mps = 0.0;
    double std_speed_mps = 0.0;  // population
    double waypoints_per_vehicle = 0.0;
    double pct_brakes = 0.0;     // fraction in [0, 1]
    double pct_high_jerk = 0.0;  // fraction in [0, 1]
    std::uint64_t hard_accel_count = 0;
    std::uint64_t hard_brake_count = 0;
    double avg_heading_change = 0.0;  // (sum |dh| / 360) / n_vehicles
    double avg_fuel_ml_per_veh = 0.0;

    auto sort_key() const { return std::tie(key.direction, key.segment, key.interval); }
};

// Throws InvariantError (EmptyCell) when the accumulator holds no waypoints.
CellMetrics finalize(const CellKey& key, const CellAccumulator& acc);

// Keyed accumulator map. Keying by construction rules out cross-cell
// accumulate/merge mistakes.
class CellMap {
public:
    void add(const KinematicSample& s, const IntervalScheme& scheme);
    void merge_from(const CellMap& other);

    std::vector<CellMetrics> finalize_sorted() const;
    std::uint64_t total_waypoints() const;
    std::size_t cell_count() const { return cells_.size(); }
    const std::unordered_map<CellKey, CellAccumulator, CellKeyHash>& cells() const {
        return cells_;
    }

private:
    std::unordered_map<CellKey, CellAccumulator, CellKeyHash> cells_;
};

struct AggregateOptions {
    int threads = 1;
    bool deterministic = true;  // canonical order: bitwise-stable output
};

struct AggregateResult {
    CellMap cells;
    std::uint64_t pre_epoch_samples = 0;  // skipped, reported in the summary
};

// Bins every in-epoch sample. Deterministic mode accumulates sequentially in
// journey order; parallel mode statically partitions journeys across workers
// and merges worker maps in worker order (counts exact either way, float
// fields within 1e-9 relative of each other).
AggregateResult aggregate_samples(
    const std::vector<std::vector<KinematicSample>>& per_journey,
    const IntervalScheme& scheme, const AggregateOptions& opts);

}  // namespace tprof
