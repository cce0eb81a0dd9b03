#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "tprof/geo.hpp"
#include "tprof/kernels.hpp"

// AVX2 kernel variants. Compiled with -mavx2 in its own TU; only reachable
// through the dispatch table when the CPU reports AVX2. Lane arithmetic is
// kept operation-for-operation identical to the scalar reference so results
// match bitwise.

namespace tprof::kernels {
namespace {

constexpr double kR = geo::kEarthRadiusM;

void project_point_avx2(const EdgeTable& tab, double lat_rad, double lon_rad,
                        ProjectHit& hit) {
    const __m256d vlat = _mm256_set1_pd(lat_rad);
    const __m256d vlon = _mm256_set1_pd(lon_rad);
    const __m256d vR = _mm256_set1_pd(kR);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);

    __m256d best_d2 = _mm256_set1_pd(HUGE_VAL);
    __m256d best_t = zero;
    __m256i best_idx = _mm256_set1_epi64x(-1);
    const __m256i lane_off = _mm256_set_epi64x(3, 2, 1, 0);

    bool any = false;
    const std::size_t blocks = tab.n_blocks();
    for (std::size_t b = 0; b < blocks; ++b) {
        if (lat_rad < tab.blk_lat_lo[b] || lat_rad > tab.blk_lat_hi[b] ||
            lon_rad < tab.blk_lon_lo[b] || lon_rad > tab.blk_lon_hi[b]) {
            continue;
        }
        any = true;
        const std::size_t base = b * 4;
        const __m256d px = _mm256_mul_pd(
            _mm256_sub_pd(vlon, _mm256_loadu_pd(&tab.lon0[base])),
            _mm256_loadu_pd(&tab.kx[base]));
        const __m256d py = _mm256_mul_pd(
            _mm256_sub_pd(vlat, _mm256_loadu_pd(&tab.lat0[base])), vR);
        const __m256d ex = _mm256_loadu_pd(&tab.ex[base]);
        const __m256d ey = _mm256_loadu_pd(&tab.ey[base]);
        const __m256d dot =
            _mm256_add_pd(_mm256_mul_pd(px, ex), _mm256_mul_pd(py, ey));
        __m256d t = _mm256_mul_pd(dot, _mm256_loadu_pd(&tab.inv_len2[base]));
        t = _mm256_max_pd(t, zero);
        t = _mm256_min_pd(t, one);
        const __m256d hx = _mm256_sub_pd(px, _mm256_mul_pd(t, ex));
        const __m256d hy = _mm256_sub_pd(py, _mm256_mul_pd(t, ey));
        const __m256d d2 =
            _mm256_add_pd(_mm256_mul_pd(hx, hx), _mm256_mul_pd(hy, hy));

        // Strict < keeps the first (lowest-index) edge per lane on ties.
        const __m256d lt = _mm256_cmp_pd(d2, best_d2, _CMP_LT_OQ);
        best_d2 = _mm256_blendv_pd(best_d2, d2, lt);
        best_t = _mm256_blendv_pd(best_t, t, lt);
        const __m256i idx =
            _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(base)),
                             lane_off);
        best_idx = _mm256_blendv_epi8(best_idx, idx, _mm256_castpd_si256(lt));
    }

    if (!any) {
        hit.dist_sq = 0.0;
        hit.t = 0.0;
        hit.edge = -1;
        return;
    }

    alignas(32) double d2s[4], ts[4];
    alignas(32) std::int64_t idxs[4];
    _mm256_store_pd(d2s, best_d2);
    _mm256_store_pd(ts, best_t);
    _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), best_idx);

    // Cross-lane reduction: lexicographic min on (distance, edge index).
    int win = -1;
    for (int l = 0; l < 4; ++l) {
        if (idxs[l] < 0) continue;
        if (win < 0 || d2s[l] < d2s[win] ||
            (d2s[l] == d2s[win] && idxs[l] < idxs[win])) {
            win = l;
        }
    }
    if (win < 0 || idxs[win] >= static_cast<std::int64_t>(tab.n_edges)) {
        hit.dist_sq = 0.0;
        hit.t = 0.0;
        hit.edge = -1;
        return;
    }
    hit.dist_sq = d2s[win];
    hit.t = ts[win];
    hit.edge = idxs[win];
}

void fuel_consumed_avx2(const double* v, const double* a, const double* dt_s,
                        double* out, std::size_t n, const double b[4],
                        const double c[3]) {
    const __m256d b0 = _mm256_set1_pd(b[0]), b1 = _mm256_set1_pd(b[1]);
    const __m256d b2 = _mm256_set1_pd(b[2]), b3 = _mm256_set1_pd(b[3]);
    const __m256d c0 = _mm256_set1_pd(c[0]), c1 = _mm256_set1_pd(c[1]);
    const __m256d c2 = _mm256_set1_pd(c[2]);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vi = _mm256_loadu_pd(v + i);
        __m256d cruise = _mm256_add_pd(b2, _mm256_mul_pd(vi, b3));
        cruise = _mm256_add_pd(b1, _mm256_mul_pd(vi, cruise));
        cruise = _mm256_add_pd(b0, _mm256_mul_pd(vi, cruise));
        const __m256d apos = _mm256_max_pd(_mm256_loadu_pd(a + i), zero);
        __m256d acc = _mm256_add_pd(c1, _mm256_mul_pd(vi, c2));
        acc = _mm256_add_pd(c0, _mm256_mul_pd(vi, acc));
        acc = _mm256_mul_pd(apos, acc);
        const __m256d f = _mm256_mul_pd(_mm256_add_pd(cruise, acc),
                                        _mm256_loadu_pd(dt_s + i));
        _mm256_storeu_pd(out + i, f);
    }
    for (; i < n; ++i) {
        const double vi = v[i];
        const double cruise = b[0] + vi * (b[1] + vi * (b[2] + vi * b[3]));
        const double apos = (a[i] > 0.0) ? a[i] : 0.0;
        out[i] = (cruise + apos * (c[0] + vi * (c[1] + vi * c[2]))) * dt_s[i];
    }
}

void classify_flags_avx2(const double* accel, const double* jerk,
                         std::uint8_t* out, std::size_t n,
                         const FlagThresholds& th) {
    const __m256d brake = _mm256_set1_pd(th.brake_accel_max);
    const __m256d hard_brake = _mm256_set1_pd(th.hard_brake_max);
    const __m256d hard_accel = _mm256_set1_pd(th.hard_accel_min);
    const __m256d jpos = _mm256_set1_pd(th.jerk_pos_min);
    const __m256d jneg = _mm256_set1_pd(th.jerk_neg_max);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(accel + i);
        const __m256d j = _mm256_loadu_pd(jerk + i);
        const int mb = _mm256_movemask_pd(_mm256_cmp_pd(a, brake, _CMP_LE_OQ));
        const int mhb =
            _mm256_movemask_pd(_mm256_cmp_pd(a, hard_brake, _CMP_LE_OQ));
        const int mha =
            _mm256_movemask_pd(_mm256_cmp_pd(a, hard_accel, _CMP_GE_OQ));
        const int mj = _mm256_movemask_pd(
            _mm256_or_pd(_mm256_cmp_pd(j, jpos, _CMP_GE_OQ),
                         _mm256_cmp_pd(j, jneg, _CMP_LE_OQ)));
        for (int l = 0; l < 4; ++l) {
            std::uint8_t f = 0;
            if (mb >> l & 1) f |= flag::kBrake;
            if (mhb >> l & 1) f |= flag::kHardBrake;
            if (mha >> l & 1) f |= flag::kHardAccel;
            if (mj >> l & 1) f |= flag::kHighJerk;
            out[i + l] = f;
        }
    }
    for (; i < n; ++i) {
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

void min_max_avx2(const double* v, std::size_t n, double& lo, double& hi) {
    if (n < 8) {
        double mn = v[0], mx = v[0];
        for (std::size_t i = 1; i < n; ++i) {
            mn = (v[i] < mn) ? v[i] : mn;
            mx = (v[i] > mx) ? v[i] : mx;
        }
        lo = mn;
        hi = mx;
        return;
    }
    __m256d vmn = _mm256_loadu_pd(v);
    __m256d vmx = vmn;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(v + i);
        vmn = _mm256_min_pd(x, vmn);
        vmx = _mm256_max_pd(x, vmx);
    }
    alignas(32) double mns[4], mxs[4];
    _mm256_store_pd(mns, vmn);
    _mm256_store_pd(mxs, vmx);
    double mn = mns[0], mx = mxs[0];
    for (int l = 1; l < 4; ++l) {
        mn = (mns[l] < mn) ? mns[l] : mn;
        mx = (mxs[l] > mx) ? mxs[l] : mx;
    }
    for (; i < n; ++i) {
        mn = (v[i] < mn) ? v[i] : mn;
        mx = (v[i] > mx) ? v[i] : mx;
    }
    lo = mn;
    hi = mx;
}

const KernelOps kAvx2Ops = {
    project_point_avx2,
    fuel_consumed_avx2,
    classify_flags_avx2,
    min_max_avx2,
};

}  // namespace

const KernelOps& avx2_ops() { return kAvx2Ops; }

}  // namespace tprof::kernels

#endif  // x86_64
