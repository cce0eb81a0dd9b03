#pragma once

// Batch arithmetic kernels for the hot per-waypoint loops: nearest-edge
// projection, fuel-rate evaluation, event flagging, and min/max scans.
// Each kernel exists as a scalar reference and an AVX2 variant selected at
// runtime; both must produce bit-identical results (enforced by tests, and
// the reason the build disables FP contraction).

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tprof::kernels {

// Densified polyline edges in structure-of-arrays form, planarized per edge
// around its own reference latitude. Arrays are padded to a multiple of 4
// lanes; pad lanes hold sentinel edges that can never win the argmin.
struct EdgeTable {
    std::vector<double> lat0;      // edge origin latitude, radians
    std::vector<double> lon0;      // edge origin longitude, radians
    std::vector<double> kx;        // meters per radian of longitude at ref lat
    std::vector<double> ex, ey;    // edge vector, meters
    std::vector<double> inv_len2;  // 1 / |edge|^2
    std::vector<double> mp0;       // milepost at edge origin, miles
    std::vector<double> mp_len;    // milepost span of the edge, miles
    std::vector<double> bearing;   // compass bearing of the edge, degrees

    std::size_t n_edges = 0;   // real edges (pre-padding)
    std::size_t n_lanes = 0;   // padded length, multiple of 4

    // Per 4-edge block: bounding box in radians, pre-expanded by the prune
    // margin. Blocks whose box excludes the query point are skipped
    // identically by every backend.
    std::vector<double> blk_lat_lo, blk_lat_hi, blk_lon_lo, blk_lon_hi;

    std::size_t n_blocks() const { return n_lanes / 4; }
};

struct ProjectHit {
    double dist_sq = 0.0;  // squared planar distance, m^2
    double t = 0.0;        // clamped edge parameter in [0, 1]
    std::int64_t edge = -1;  // -1 when every block was pruned
};

struct FlagThresholds {
    double brake_accel_max;
    double hard_brake_max;
    double hard_accel_min;
    double jerk_pos_min;
    double jerk_neg_max;
};

namespace flag {
inline constexpr std::uint8_t kBrake = 1;
inline constexpr std::uint8_t kHardBrake = 2;
inline constexpr std::uint8_t kHardAccel = 4;
inline constexpr std::uint8_t kHighJerk = 8;
}  // namespace flag

struct KernelOps {
    // Nearest edge of `table` to the point (lat, lon in radians), lexicographic
    // argmin on (distance, edge index) so exact ties resolve to the lower
    // milepost.
    void (*project_point)(const EdgeTable& table, double lat_rad, double lon_rad,
                          ProjectHit& hit);

    // out[i] = (cruise(v) + max(a, 0) * accel_term(v)) * dt. Callers encode
    // "no fuel attributed" as dt = 0.
    void (*fuel_consumed)(const double* v, const double* a, const double* dt_s,
                          double* out, std::size_t n, const double b[4],
                          const double c[3]);

    // Threshold flags per sample; NaN acceleration/jerk sets no flags.
    void (*classify_flags)(const double* accel, const double* jerk,
                           std::uint8_t* out, std::size_t n,
                           const FlagThresholds& th);

    // Min and max of v[0..n). n must be >= 1; values must be NaN-free.
    void (*min_max)(const double* v, std::size_t n, double& lo, double& hi);
};

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool avx2_supported();

// Active table. Picked once at startup: AVX2 when the CPU has it, overridable
// with TPROF_KERNELS=scalar|avx2 or force_backend().
const KernelOps& ops();
Backend active_backend();
void force_backend(Backend b);

const KernelOps& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const KernelOps& avx2_ops();
#endif

}  // namespace tprof::kernels
