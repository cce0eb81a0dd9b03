#include "tprof/indices.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tprof/errors.hpp"
#include "tprof/kernels.hpp"
#include "tprof/util.hpp"

namespace tprof {

void FuelParams::validate() const {
    // Cruise rate f(v) = b0 + b1 v + b2 v^2 + b3 v^3 must stay positive on
    // the physical speed range [0, 60] m/s. Check f at 0, at 60, and at any
    // interior critical point (roots of the quadratic derivative).
    auto f = [&](double v) { return b0 + v * (b1 + v * (b2 + v * b3)); };
    auto fail = [&](double v) {
        throw ConfigError("InvalidFuelModel: cruise fuel rate is not positive at v = " +
                          util::format_double(v) + " m/s (rate " +
                          util::format_double(f(v)) + ")");
    };
    if (!(f(0.0) > 0.0)) fail(0.0);
    if (!(f(60.0) > 0.0)) fail(60.0);
    // f'(v) = b1 + 2 b2 v + 3 b3 v^2
    const double qa = 3.0 * b3, qb = 2.0 * b2, qc = b1;
    if (qa == 0.0) {
        if (qb != 0.0) {
            const double v = -qc / qb;
            if (v > 0.0 && v < 60.0 && !(f(v) > 0.0)) fail(v);
        }
        return;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return;  // monotone on the whole line
    const double sq = std::sqrt(disc);
    for (const double v : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
        if (v > 0.0 && v < 60.0 && !(f(v) > 0.0)) fail(v);
    }
}

double fuel_rate_mlps(double v_mps, double a_mps2, const FuelParams& p) {
    const double cruise = p.b0 + v_mps * (p.b1 + v_mps * (p.b2 + v_mps * p.b3));
    const double a_pos = a_mps2 > 0.0 ? a_mps2 : 0.0;
    const double accel = a_pos * (p.c0 + v_mps * (p.c1 + v_mps * p.c2));
    return cruise + accel;
}

void attach_fuel(std::vector<KinematicSample>& samples, const FuelParams& p) {
    const std::size_t n = samples.size();
    if (n == 0) return;
    std::vector<double> v(n), a(n), dt(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = samples[i].speed_mps;
        // Chain starts carry no interval: burn 0 via dt = 0 (and a = 0 so
        // the acceleration term cannot produce NaN * 0).
        a[i] = samples[i].has_accel() ? samples[i].accel_mps2 : 0.0;
        dt[i] = std::isnan(samples[i].dt_s) ? 0.0 : samples[i].dt_s;
    }
    const double b[4] = {p.b0, p.b1, p.b2, p.b3};
    const double c[3] = {p.c0, p.c1, p.c2};
    kernels::ops().fuel_consumed(v.data(), a.data(), dt.data(), out.data(), n, b, c);
    for (std::size_t i = 0; i < n; ++i) samples[i].fuel_ml = out[i];
}

SpeedLimitMap SpeedLimitMap::uniform(double limit_mps) {
    if (!(limit_mps > 0.0)) {
        throw ConfigError("InvalidSpeedLimit: uniform limit must be > 0, got " +
                          util::format_double(limit_mps));
    }
    SpeedLimitMap m;
    m.uniform_ = limit_mps;
    return m;
}

SpeedLimitMap SpeedLimitMap::from_bands(std::vector<SpeedLimitBand> bands) {
    if (bands.empty()) {
        throw ConfigError("InvalidSpeedLimit: band list is empty");
    }
    std::sort(bands.begin(), bands.end(),
              [](const SpeedLimitBand& a, const SpeedLimitBand& b) {
                  return a.start_mi < b.start_mi;
              });
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        if (!(b.end_mi > b.start_mi) || !(b.limit_mps > 0.0)) {
            throw ConfigError("InvalidSpeedLimit: band [" +
                              util::format_double(b.start_mi) + ", " +
                              util::format_double(b.end_mi) + "):" +
                              util::format_double(b.limit_mps));
        }
        if (i > 0 && b.start_mi < bands[i - 1].end_mi - 1e-9) {
            throw ConfigError("InvalidSpeedLimit: bands overlap near milepost " +
                              util::format_double(b.start_mi));
        }
    }
    SpeedLimitMap m;
    m.bands_ = std::move(bands);
    return m;
}

std::optional<double> SpeedLimitMap::limit_at(double milepost_mi) const {
    if (uniform_) return uniform_;
    for (const auto& b : bands_) {
        if (milepost_mi >= b.start_mi && milepost_mi < b.end_mi) return b.limit_mps;
    }
    // The final band also covers its own end milepost so the route terminus
    // is never a hole.
    if (!bands_.empty() && milepost_mi == bands_.back().end_mi) {
        return bands_.back().limit_mps;
    }
    return std::nullopt;
}

void SpeedLimitMap::validate_coverage(double route_length_mi) const {
    if (uniform_) return;
    double covered_to = 0.0;
    for (const auto& b : bands_) {
        if (b.start_mi > covered_to + 1e-9) {
            throw ConfigError("InvalidSpeedLimit: gap in coverage near milepost " +
                              util::format_double(covered_to));
        }
        covered_to = std::max(covered_to, b.end_mi);
    }
    if (covered_to < route_length_mi - 1e-9) {
        throw ConfigError("InvalidSpeedLimit: coverage ends at milepost " +
                          util::format_double(covered_to) + " but route is " +
                          util::format_double(route_length_mi) + " mi");
    }
}

double comfort_index(const CellMetrics& m, const IndexWeights& w) {
    return w.comfort_brakes * m.pct_brakes + w.comfort_jerk * m.pct_high_jerk;
}

double stability_index(const CellMetrics& m, const IndexWeights& w) {
    return w.stability_hard_accel * static_cast<double>(m.hard_accel_count) +
           w.stability_hard_brake * static_cast<double>(m.hard_brake_count);
}

std::optional<double> safety_index(const CellMetrics& m, double limit_mps,
                                   const IndexWeights& w,
                                   const IndexOptions& opts) {
    if (!(m.mean_speed_mps > 0.0)) return std::nullopt;
    const double var_coef = m.std_speed_mps / m.mean_speed_mps;
    double drop = (limit_mps - m.mean_speed_mps) / limit_mps;
    if (!opts.signed_speed_drop && drop < 0.0) drop = 0.0;
    return w.safety_var_coef * var_coef + w.safety_speed_drop * drop +
           w.safety_heading * m.avg_heading_change;
}

std::vector<IndexedCell> index_all(const std::vector<CellMetrics>& cells,
                                   const SegmentGrid& grid_eb,
                                   const SegmentGrid& grid_wb,
                                   const SpeedLimitMap& limits_eb,
                                   const SpeedLimitMap& limits_wb,
                                   const IndexWeights& weights,
                                   const IndexOptions& opts) {
    std::vector<IndexedCell> out;
    out.reserve(cells.size());
    for (const CellMetrics& m : cells) {
        const bool eb = m.key.direction == Direction::EB;
        const SegmentGrid& grid = eb ? grid_eb : grid_wb;
        const SpeedLimitMap& limits = eb ? limits_eb : limits_wb;

        const double seg_start = m.key.segment * grid.segment_length_mi;
        const double seg_end =
            std::min(seg_start + grid.segment_length_mi, grid.route_length_mi);
        const double midpoint_mi = 0.5 * (seg_start + seg_end);
        const auto limit = limits.limit_at(midpoint_mi);
        if (!limit) {
            throw InputError("MissingSpeedLimit: no limit covers " +
                             std::string(to_string(m.key.direction)) +
                             " milepost " + util::format_double(midpoint_mi));
        }

        IndexedCell cell;
        cell.metrics = m;
        cell.safety = safety_index(m, *limit, weights, opts);
        cell.comfort = comfort_index(m, weights);
        cell.stability = stability_index(m, weights);
        if (opts.emit_per_waypoint_stability) {
            cell.stability_per_waypoint =
                cell.stability / static_cast<double>(m.n_waypoints);
        }
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace tprof
