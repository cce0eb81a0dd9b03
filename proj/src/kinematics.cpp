#include "tprof/kinematics.hpp"

#include "tprof/errors.hpp"
#include "tprof/geo.hpp"

namespace tprof {

void EventThresholds::validate() const {
    if (!(hard_brake_max < brake_accel_max && brake_accel_max < 0.0 &&
          0.0 < hard_accel_min)) {
        throw ConfigError(
            "thresholds must satisfy hard_brake_max < brake_accel_max < 0 < "
            "hard_accel_min");
    }
    if (!(jerk_neg_max < 0.0 && 0.0 < jerk_pos_min)) {
        throw ConfigError("thresholds must satisfy jerk_neg_max < 0 < jerk_pos_min");
    }
    if (max_dt_ms <= 0) {
        throw ConfigError("max_dt_ms must be > 0");
    }
}

std::uint8_t classify_events(double accel_mps2, double jerk_mps3,
                             const EventThresholds& th) {
    std::uint8_t out = 0;
    const auto ft = th.flag_thresholds();
    kernels::ops().classify_flags(&accel_mps2, &jerk_mps3, &out, 1, ft);
    return out;
}

void derive_kinematics_into(const MatchedJourney& journey,
                            const EventThresholds& th,
                            std::vector<KinematicSample>& out) {
    const auto& pings = journey.pings;
    const std::size_t first = out.size();
    out.resize(first + pings.size());

    double prev_accel = NAN;
    for (std::size_t i = 0; i < pings.size(); ++i) {
        const MatchedPing& p = pings[i];
        KinematicSample& s = out[first + i];
        s.journey_ix = journey.journey_ix;
        s.timestamp_ms = p.timestamp_ms;
        s.milepost_mi = p.milepost_mi;
        s.segment = p.segment;
        s.direction = p.direction;
        s.speed_mps = p.speed_mps;

        if (i == 0) {
            prev_accel = NAN;
            continue;
        }
        const MatchedPing& q = pings[i - 1];
        const std::int64_t dt_ms = p.timestamp_ms - q.timestamp_ms;
        if (dt_ms <= 0 || dt_ms > th.max_dt_ms) {
            prev_accel = NAN;  // gap: restart the chain
            continue;
        }
        const double dt_s = static_cast<double>(dt_ms) / 1000.0;
        s.dt_s = dt_s;
        s.accel_mps2 = (p.speed_mps - q.speed_mps) / dt_s;
        if (!std::isnan(prev_accel)) {
            s.jerk_mps3 = (s.accel_mps2 - prev_accel) / dt_s;
        }
        s.heading_delta_deg = geo::heading_delta_deg(q.heading_deg, p.heading_deg);
        prev_accel = s.accel_mps2;
    }

    // Batch flag classification over this journey's samples.
    const std::size_t n = pings.size();
    if (n == 0) return;
    std::vector<double> accel(n), jerk(n);
    std::vector<std::uint8_t> flags(n);
    for (std::size_t i = 0; i < n; ++i) {
        accel[i] = out[first + i].accel_mps2;
        jerk[i] = out[first + i].jerk_mps3;
    }
    kernels::ops().classify_flags(accel.data(), jerk.data(), flags.data(), n,
                                  th.flag_thresholds());
    for (std::size_t i = 0; i < n; ++i) {
        out[first + i].flags = flags[i];
    }
}

std::vector<KinematicSample> derive_kinematics(const MatchedJourney& journey,
                                               const EventThresholds& th) {
    std::vector<KinematicSample> out;
    derive_kinematics_into(journey, th, out);
    return out;
}

}  // namespace tprof
