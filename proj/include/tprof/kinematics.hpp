#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tprof/kernels.hpp"
#include "tprof/route.hpp"

namespace tprof {

// Event thresholds. All comparisons are inclusive, so a sample exactly at a
// bound carries the flag.
struct EventThresholds {
    double brake_accel_max = -1.0;   // m/s^2, BRAKE when a <= this
    double hard_brake_max = -2.638;  // m/s^2
    double hard_accel_min = 3.8;     // m/s^2
    double jerk_pos_min = 1.07;      // m/s^3
    double jerk_neg_max = -1.47;     // m/s^3
    std::int64_t max_dt_ms = 10000;  // longer ping gaps restart the chain

    void validate() const;  // throws ConfigError on ordering violations

    kernels::FlagThresholds flag_thresholds() const {
        return {brake_accel_max, hard_brake_max, hard_accel_min, jerk_pos_min,
                jerk_neg_max};
    }
};

// A waypoint already matched to the corridor.
struct MatchedPing {
    std::int64_t timestamp_ms = 0;
    double milepost_mi = 0.0;
    std::int32_t segment = 0;
    Direction direction = Direction::EB;
    double speed_mps = 0.0;
    double heading_deg = 0.0;
};

struct MatchedJourney {
    std::uint32_t journey_ix = 0;
    std::vector<MatchedPing> pings;
};

// Waypoint enriched with finite-difference kinematics. Absent derivatives
// (first waypoint of a chain, or after a gap) are stored as NaN.
struct KinematicSample {
    std::uint32_t journey_ix = 0;
    std::int64_t timestamp_ms = 0;
    double milepost_mi = 0.0;
    std::int32_t segment = 0;
    Direction direction = Direction::EB;
    double speed_mps = 0.0;
    double accel_mps2 = NAN;
    double jerk_mps3 = NAN;
    double heading_delta_deg = NAN;
    double dt_s = NAN;      // to previous in-chain ping
    double fuel_ml = 0.0;   // filled in by attach_fuel
    std::uint8_t flags = 0;

    bool has_accel() const { return !std::isnan(accel_mps2); }
    bool has_jerk() const { return !std::isnan(jerk_mps3); }
    bool has_heading_delta() const { return !std::isnan(heading_delta_deg); }
};

// Flags for one sample; NaN inputs never set flags.
std::uint8_t classify_events(double accel_mps2, double jerk_mps3,
                             const EventThresholds& th);

// First differences of reported speed and of acceleration over consecutive
// pings, heading deltas folded to [0, 180], and threshold flags. A pair with
// dt outside (0, max_dt] breaks the chain: the later sample gets absent
// derivatives. No smoothing.
std::vector<KinematicSample> derive_kinematics(const MatchedJourney& journey,
                                               const EventThresholds& th);
void derive_kinematics_into(const MatchedJourney& journey,
                            const EventThresholds& th,
                            std::vector<KinematicSample>& out);

}  // namespace tprof
