#include <cmath>

#include "tprof/geo.hpp"
#include "tprof/kernels.hpp"

// Scalar reference kernels. These mirror the AVX2 lane semantics exactly:
// clamps are written as (x > lo ? x : lo) / (x < hi ? x : hi) to match
// MAXPD/MINPD, including the -0.0 cases, and no expression may be contracted
// into an FMA.

namespace tprof::kernels {
namespace {

constexpr double kR = geo::kEarthRadiusM;

void project_point_scalar(const EdgeTable& tab, double lat_rad, double lon_rad,
                          ProjectHit& hit) {
    double best_d2 = 0.0;
    double best_t = 0.0;
    std::int64_t best_edge = -1;

    const std::size_t blocks = tab.n_blocks();
    for (std::size_t b = 0; b < blocks; ++b) {
        if (lat_rad < tab.blk_lat_lo[b] || lat_rad > tab.blk_lat_hi[b] ||
            lon_rad < tab.blk_lon_lo[b] || lon_rad > tab.blk_lon_hi[b]) {
            continue;
        }
        const std::size_t base = b * 4;
        for (std::size_t lane = 0; lane < 4; ++lane) {
            const std::size_t i = base + lane;
            const double px = (lon_rad - tab.lon0[i]) * tab.kx[i];
            const double py = (lat_rad - tab.lat0[i]) * kR;
            const double dot = px * tab.ex[i] + py * tab.ey[i];
            double t = dot * tab.inv_len2[i];
            t = (t > 0.0) ? t : 0.0;
            t = (t < 1.0) ? t : 1.0;
            const double hx = px - t * tab.ex[i];
            const double hy = py - t * tab.ey[i];
            const double d2 = hx * hx + hy * hy;
            if (best_edge < 0 || d2 < best_d2 ||
                (d2 == best_d2 && static_cast<std::int64_t>(i) < best_edge)) {
                best_d2 = d2;
                best_t = t;
                best_edge = static_cast<std::int64_t>(i);
            }
        }
    }
    if (best_edge >= static_cast<std::int64_t>(tab.n_edges)) {
        // A pad lane can only win when no real edge was considered.
        best_edge = -1;
    }
    if (best_edge < 0) {
        best_d2 = 0.0;
        best_t = 0.0;
    }
    hit.dist_sq = best_d2;
    hit.t = best_t;
    hit.edge = best_edge;
}

void fuel_consumed_scalar(const double* v, const double* a, const double* dt_s,
                          double* out, std::size_t n, const double b[4],
                          const double c[3]) {
    for (std::size_t i = 0; i < n; ++i) {
        const double vi = v[i];
        const double cruise = b[0] + vi * (b[1] + vi * (b[2] + vi * b[3]));
        const double apos = (a[i] > 0.0) ? a[i] : 0.0;
        const double accel = apos * (c[0] + vi * (c[1] + vi * c[2]));
        out[i] = (cruise + accel) * dt_s[i];
    }
}

void classify_flags_scalar(const double* accel, const double* jerk,
                           std::uint8_t* out, std::size_t n,
                           const FlagThresholds& th) {
    for (std::size_t i = 0; i < n; ++i) {
        const double a = accel[i];
        const double j = jerk[i];
        std::uint8_t f = 0;
        if (a <= th.brake_accel_max) f |= flag::kBrake;
        if (a <= th.hard_brake_max) f |= flag::kHardBrake;
        if (a >= th.hard_accel_min) f |= flag::kHardAccel;
        if (j >= th.jerk_pos_min || j <= th.jerk_neg_max) f |= flag::kHighJerk;
        out[i] = f;
    }
}

void min_max_scalar(const double* v, std::size_t n, double& lo, double& hi) {
    double mn = v[0];
    double mx = v[0];
    for (std::size_t i = 1; i < n; ++i) {
        mn = (v[i] < mn) ? v[i] : mn;
        mx = (v[i] > mx) ? v[i] : mx;
    }
    lo = mn;
    hi = mx;
}

const KernelOps kScalarOps = {
    project_point_scalar,
    fuel_consumed_scalar,
    classify_flags_scalar,
    min_max_scalar,
};

}  // namespace

const KernelOps& scalar_ops() { return kScalarOps; }

}  // namespace tprof::kernels
