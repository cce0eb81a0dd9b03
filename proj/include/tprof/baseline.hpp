#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tprof/route.hpp"
#include "tprof/table.hpp"

namespace tprof {

enum class DayType : std::uint8_t { weekday = 0, weekend = 1 };

std::string_view to_string(DayType d);
std::optional<DayType> parse_day_type(std::string_view s);

// UTC day type of a millisecond timestamp (Saturday/Sunday = weekend).
DayType day_type_of(std::int64_t timestamp_ms);

// A baseline slot: same place, same time of day, same kind of day.
struct SlotKey {
    Direction direction = Direction::EB;
    std::int32_t segment = 0;
    std::int32_t interval_of_day = 0;
    DayType day_type = DayType::weekday;

    auto operator<=>(const SlotKey&) const = default;
};

// Maps a table row's absolute interval to its slot via the table's epoch.
SlotKey slot_of(Direction dir, std::int32_t segment, std::int32_t interval,
                std::int64_t epoch_start_ms, std::int64_t interval_ms);

struct SlotStat {
    double mean = 0.0;
    double stdev = 0.0;  // population, over contributing days
    std::int64_t days = 0;
};

// Historical per-slot statistics for every metric column of the daily
// tables. Slots with fewer than min_days observations stay in the profile
// (marked by their day count) but are skipped during detection.
struct BaselineProfile {
    double segment_length_miles = 0.0;
    double interval_minutes = 0.0;
    std::int64_t min_days = 2;
    std::vector<std::string> metrics;
    // Stats parallel to `metrics`; absent where a metric never appeared.
    std::map<SlotKey, std::vector<std::optional<SlotStat>>> slots;
};

// Throws InputError (GridMismatch) unless every table agrees on
// segment_length_miles, interval_minutes, and column set.
BaselineProfile build_baseline(const std::vector<ValueTable>& daily_tables,
                               std::int64_t min_days);

enum class Severity : std::uint8_t { info = 0, warn = 1, alert = 2 };
std::string_view to_string(Severity s);

struct AnomalyFlag {
    CellKey key;
    std::string metric;
    double observed = 0.0;
    double baseline_mean = 0.0;
    double z = 0.0;
    Severity severity = Severity::warn;
};

struct DetectParams {
    double warn_z = 2.0;
    double alert_z = 3.0;
    double std_floor_frac = 0.05;  // floor = frac * |baseline mean|
};

// Per-metric direction of badness. Metrics without a polarity (raw volume
// bookkeeping) are not monitored.
enum class Polarity : std::uint8_t { low_bad, high_bad };
std::optional<Polarity> metric_polarity(const std::string& metric);

// Z-scores every monitored metric of every current cell against its slot
// and returns flags where the deviation points the bad way and |z| clears
// the warn cutoff. Output is sorted (direction, segment, interval, metric),
// so the result is invariant under input row order. Throws InputError
// (GridMismatch) when the table's grid differs from the baseline's.
std::vector<AnomalyFlag> detect_anomalies(const ValueTable& current,
                                          const BaselineProfile& baseline,
                                          const DetectParams& params);

void write_baseline(const std::string& path, const BaselineProfile& profile);
BaselineProfile read_baseline(const std::string& path);

void write_anomalies(const std::string& path, const std::vector<AnomalyFlag>& flags);

}  // namespace tprof
