#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tprof/indices.hpp"
#include "tprof/kinematics.hpp"

namespace tprof {

// Every tunable of a run, loadable from a flat `key = value` file with `#`
// comments. Unknown keys are errors so typos cannot silently revert a
// setting to its default. Environment variables named TPROF_<KEY-upcased>
// override file values.
struct RunConfig {
    // Binning grid.
    double segment_length_miles = 0.5;
    double interval_minutes = 30.0;
    // Interval epoch; when unset the pipeline floors the earliest timestamp
    // to an interval boundary.
    std::optional<std::int64_t> epoch_start_ms;

    // Matching and journey assembly.
    double max_offset_m = 50.0;
    std::int64_t gap_split_ms = 30000;

    EventThresholds thresholds;
    IndexWeights weights;
    FuelParams fuel;

    // Posted limit: uniform unless per-direction band strings are given,
    // formatted "start-end:limit_mps[,start-end:limit_mps...]" in miles.
    double speed_limit_mps = 29.0576;  // 65 mph
    std::string speed_limits_eb;
    std::string speed_limits_wb;

    bool deterministic_mode = true;
    bool signed_speed_drop = false;
    bool emit_stability_per_waypoint = false;

    // Baseline / anomaly detection.
    std::int64_t baseline_min_days = 2;
    double anomaly_warn_z = 2.0;
    double anomaly_alert_z = 3.0;
    double anomaly_std_floor_frac = 0.05;

    // Throws ConfigError on any out-of-range field.
    void validate() const;

    SpeedLimitMap limits_for(Direction d, double route_length_mi) const;
};

// Flat key-value parser shared by config files and scenario specs.
// Duplicate keys keep the last value; `#` starts a comment anywhere.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

// Builds a RunConfig from defaults + optional file + TPROF_* environment
// overrides. Unknown keys throw ConfigError naming the key.
RunConfig load_config(const std::optional<std::string>& path);

// Applies one key to the config; exposed for the env-override path and
// tests. Throws ConfigError for unknown keys or unparsable values.
void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value);

// All recognized keys, for the env-override sweep and --help text.
const std::vector<std::string>& config_keys();

}  // namespace tprof
