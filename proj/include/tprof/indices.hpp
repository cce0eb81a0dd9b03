#pragma once

#include <optional>
#include <vector>

#include "tprof/aggregate.hpp"
#include "tprof/kinematics.hpp"

namespace tprof {

// Component weights for the three composite indices. Defaults weight every
// term equally.
struct IndexWeights {
    double safety_var_coef = 1.0;    // w on std/mean speed ratio
    double safety_speed_drop = 1.0;  // w on relative shortfall vs limit
    double safety_heading = 1.0;     // w on avg heading change
    double comfort_brakes = 1.0;
    double comfort_jerk = 1.0;
    double stability_hard_accel = 1.0;
    double stability_hard_brake = 1.0;
};

// Cubic cruise / quadratic acceleration fuel-rate model (mL/s). The default
// coefficients are a published mid-size-sedan fit.
struct FuelParams {
    double b0 = 0.1569;
    double b1 = 2.450e-2;
    double b2 = -7.415e-4;
    double b3 = 5.975e-5;
    double c0 = 0.07224;
    double c1 = 0.09681;
    double c2 = 1.075e-3;

    // Throws ConfigError unless the cruise polynomial stays positive on
    // [0, 60] m/s (a physically meaningless model otherwise).
    void validate() const;
};

// Scalar fuel rate (mL/s) at speed v and acceleration a. Deceleration
// contributes no acceleration-term fuel.
double fuel_rate_mlps(double v_mps, double a_mps2, const FuelParams& p);

// Fills s.fuel_ml = rate(v, a) * dt for every sample through the active
// kernel backend. Chain starts (no dt) burn 0 by convention.
void attach_fuel(std::vector<KinematicSample>& samples, const FuelParams& p);

// Posted speed limit lookup by milepost band.
struct SpeedLimitBand {
    double start_mi = 0.0;
    double end_mi = 0.0;  // half-open [start, end)
    double limit_mps = 0.0;
};

class SpeedLimitMap {
public:
    static SpeedLimitMap uniform(double limit_mps);
    static SpeedLimitMap from_bands(std::vector<SpeedLimitBand> bands);

    // Limit at a milepost, or nullopt when no band covers it. A uniform map
    // covers every milepost.
    std::optional<double> limit_at(double milepost_mi) const;

    // Throws ConfigError unless [0, route_length_mi] is fully covered.
    void validate_coverage(double route_length_mi) const;

private:
    std::optional<double> uniform_;
    std::vector<SpeedLimitBand> bands_;  // sorted, non-overlapping
};

struct IndexOptions {
    // Signed speed-drop variant: (v_d - mean)/v_d without the max(0, .)
    // clamp, so faster-than-limit cells push the index down.
    bool signed_speed_drop = false;
    // Also emit hard-event counts normalized per waypoint (extra column,
    // not part of the headline stability index).
    bool emit_per_waypoint_stability = false;
};

struct IndexedCell {
    CellMetrics metrics;
    // Unscored (nullopt) when mean speed is not positive.
    std::optional<double> safety;
    double comfort = 0.0;
    double stability = 0.0;
    std::optional<double> stability_per_waypoint;
};

double comfort_index(const CellMetrics& m, const IndexWeights& w);
double stability_index(const CellMetrics& m, const IndexWeights& w);
// nullopt when mean speed <= 0 (index undefined, not zero).
std::optional<double> safety_index(const CellMetrics& m, double limit_mps,
                                   const IndexWeights& w, const IndexOptions& opts);

// Scores every cell. Segment speed limits are sampled at the segment
// midpoint milepost; a missing limit is an InputError.
std::vector<IndexedCell> index_all(const std::vector<CellMetrics>& cells,
                                   const SegmentGrid& grid_eb,
                                   const SegmentGrid& grid_wb,
                                   const SpeedLimitMap& limits_eb,
                                   const SpeedLimitMap& limits_wb,
                                   const IndexWeights& weights,
                                   const IndexOptions& opts);

}  // namespace tprof
