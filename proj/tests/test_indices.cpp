#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tprof/errors.hpp"
#include "tprof/indices.hpp"

using namespace tprof;

namespace {

CellMetrics cell(double mean, double stddev, double pct_brakes,
                 double pct_jerk, std::uint64_t hard_accel,
                 std::uint64_t hard_brake, double heading_change) {
    CellMetrics m;
    m.n_vehicles = 10;
    m.n_waypoints = 100;
    m.mean_speed_mps = mean;
    m.std_speed_mps = stddev;
    m.pct_brakes = pct_brakes;
    m.pct_high_jerk = pct_jerk;
    m.hard_accel_count = hard_accel;
    m.hard_brake_count = hard_brake;
    m.avg_heading_change = heading_change;
    m.waypoints_per_vehicle = 10.0;
    return m;
}

IndexWeights doubled(const IndexWeights& w) {
    IndexWeights d = w;
    d.safety_var_coef *= 2.0;
    d.safety_speed_drop *= 2.0;
    d.safety_heading *= 2.0;
    d.comfort_brakes *= 2.0;
    d.comfort_jerk *= 2.0;
    d.stability_hard_accel *= 2.0;
    d.stability_hard_brake *= 2.0;
    return d;
}

}  // namespace

TEST_CASE("comfort: calm traffic scores exactly zero") {
    const auto m = cell(25.0, 1.0, 0.0, 0.0, 0, 0, 0.0);
    CHECK(comfort_index(m, IndexWeights{}) == 0.0);
}

TEST_CASE("comfort: weighted sum of braking and jerk fractions") {
    const auto m = cell(25.0, 1.0, 0.3, 0.1, 0, 0, 0.0);
    const IndexWeights w;
    CHECK(comfort_index(m, w) == w.comfort_brakes * 0.3 + w.comfort_jerk * 0.1);
    CHECK(comfort_index(m, w) == doctest::Approx(0.4).epsilon(1e-12));

    IndexWeights brakes_only;
    brakes_only.comfort_jerk = 0.0;
    CHECK(comfort_index(m, brakes_only) == 0.3);
}

TEST_CASE("stability: weighted hard-event counts") {
    const auto m = cell(25.0, 1.0, 0.0, 0.0, 2, 3, 0.0);
    CHECK(stability_index(m, IndexWeights{}) == 5.0);

    IndexWeights brakes_only;
    brakes_only.stability_hard_accel = 0.0;
    CHECK(stability_index(m, brakes_only) == 3.0);
    IndexWeights accel_only;
    accel_only.stability_hard_brake = 0.0;
    CHECK(stability_index(m, accel_only) == 2.0);
}

TEST_CASE("safety: steady traffic at the posted limit scores exactly zero") {
    const auto m = cell(26.8224, 0.0, 0.0, 0.0, 0, 0, 0.0);
    const auto s = safety_index(m, 26.8224, IndexWeights{}, IndexOptions{});
    REQUIRE(s.has_value());
    CHECK(*s == 0.0);
}

TEST_CASE("safety: three components add up") {
    // sigma/mean = 2/20, shortfall = (25-20)/25, heading term = 0.05.
    const auto m = cell(20.0, 2.0, 0.0, 0.0, 0, 0, 0.05);
    const IndexWeights w;
    const auto s = safety_index(m, 25.0, w, IndexOptions{});
    REQUIRE(s.has_value());
    CHECK(*s == w.safety_var_coef * (2.0 / 20.0) +
                    w.safety_speed_drop * ((25.0 - 20.0) / 25.0) +
                    w.safety_heading * 0.05);
    CHECK(*s == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("safety: congested-cell example") {
    const auto m = cell(4.47, 2.0, 0.0, 0.0, 0, 0, 0.02);
    const auto s = safety_index(m, 29.06, IndexWeights{}, IndexOptions{});
    REQUIRE(s.has_value());
    CHECK(*s == 2.0 / 4.47 + (29.06 - 4.47) / 29.06 + 0.02);
    CHECK(*s == doctest::Approx(1.3137).epsilon(1e-3));
}

TEST_CASE("safety: faster-than-limit clamps to zero unless signed") {
    const auto m = cell(30.0, 1.5, 0.0, 0.0, 0, 0, 0.01);
    const IndexWeights w;
    const auto clamped = safety_index(m, 25.0, w, IndexOptions{});
    REQUIRE(clamped.has_value());
    CHECK(*clamped == 1.5 / 30.0 + 0.01);  // no shortfall term

    IndexOptions opts;
    opts.signed_speed_drop = true;
    const auto raw = safety_index(m, 25.0, w, opts);
    REQUIRE(raw.has_value());
    CHECK(*raw == 1.5 / 30.0 + (25.0 - 30.0) / 25.0 + 0.01);
    CHECK(*raw < *clamped);
}

TEST_CASE("safety: undefined (not zero) when mean speed is not positive") {
    CHECK_FALSE(safety_index(cell(0.0, 0.0, 0.0, 0.0, 0, 0, 0.0), 25.0,
                             IndexWeights{}, IndexOptions{})
                    .has_value());
    CHECK_FALSE(safety_index(cell(-1.0, 0.0, 0.0, 0.0, 0, 0, 0.0), 25.0,
                             IndexWeights{}, IndexOptions{})
                    .has_value());
}

TEST_CASE("safety: monotone in speed variance") {
    double prev = -1.0;
    for (double sd = 0.0; sd <= 8.0; sd += 0.5) {
        const auto s = safety_index(cell(20.0, sd, 0.0, 0.0, 0, 0, 0.0), 25.0,
                                    IndexWeights{}, IndexOptions{});
        REQUIRE(s.has_value());
        CHECK(*s > prev);
        prev = *s;
    }
}

TEST_CASE("indices are exactly linear in power-of-two weight scalings") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const IndexWeights w;  // unit
    const IndexWeights w2 = doubled(w);
    for (int i = 0; i < 100; ++i) {
        const auto m = cell(5.0 + 25.0 * u(rng), 5.0 * u(rng), u(rng), u(rng),
                            rng() % 10, rng() % 10, 0.2 * u(rng));
        CHECK(comfort_index(m, w2) == 2.0 * comfort_index(m, w));
        CHECK(stability_index(m, w2) == 2.0 * stability_index(m, w));
        const auto s1 = safety_index(m, 29.06, w, IndexOptions{});
        const auto s2 = safety_index(m, 29.06, w2, IndexOptions{});
        REQUIRE(s1.has_value());
        REQUIRE(s2.has_value());
        CHECK(*s2 == 2.0 * *s1);
    }
}

TEST_CASE("fuel_rate: idle burns exactly the constant term") {
    const FuelParams p;
    CHECK(fuel_rate_mlps(0.0, 0.0, p) == p.b0);
}

TEST_CASE("fuel_rate: deceleration burns exactly the cruise rate") {
    const FuelParams p;
    for (const double v : {0.0, 5.0, 12.5, 26.8224, 33.0}) {
        const double cruise = fuel_rate_mlps(v, 0.0, p);
        CHECK(fuel_rate_mlps(v, -3.0, p) == cruise);
        CHECK(fuel_rate_mlps(v, -1e-12, p) == cruise);
        CHECK(fuel_rate_mlps(v, 0.0, p) == cruise);
        // An infinitesimal positive acceleration is continuous with cruise.
        CHECK(fuel_rate_mlps(v, 1e-300, p) == doctest::Approx(cruise));
    }
}

TEST_CASE("fuel_rate: matches a term-by-term evaluation") {
    const FuelParams p;
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> v(0.0, 35.0);
    std::uniform_real_distribution<double> a(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double vv = v(rng), aa = a(rng);
        const double cruise =
            p.b0 + p.b1 * vv + p.b2 * (vv * vv) + p.b3 * (vv * vv * vv);
        const double ap = aa > 0.0 ? aa : 0.0;
        const double accel = ap * (p.c0 + p.c1 * vv + p.c2 * (vv * vv));
        const double want = cruise + accel;
        const double got = fuel_rate_mlps(vv, aa, p);
        CHECK(std::fabs(got - want) <=
              1e-12 * std::max({1.0, std::fabs(got), std::fabs(want)}));
    }
}

TEST_CASE("fuel_rate: positive and increasing in speed for the default fit") {
    const FuelParams p;
    double prev = 0.0;
    for (double v = 0.0; v <= 40.0; v += 0.5) {
        const double r = fuel_rate_mlps(v, 0.0, p);
        CHECK(r > 0.0);
        CHECK(r > prev - 1e-12);
        prev = r;
    }
}

TEST_CASE("FuelParams::validate accepts the default fit") {
    CHECK_NOTHROW(FuelParams{}.validate());
}

TEST_CASE("FuelParams::validate rejects non-positive cruise rates") {
    FuelParams at_zero;
    at_zero.b0 = -0.1;
    CHECK_THROWS_WITH_AS(at_zero.validate(),
                         doctest::Contains("InvalidFuelModel"), ConfigError);

    FuelParams at_top;  // strongly negative cubic term sinks f(60)
    at_top.b3 = -1e-4;
    CHECK_THROWS_AS(at_top.validate(), ConfigError);

    // Positive at both ends but dips negative at the interior critical point
    // v = 25: f(25) = 1 - 5 + 2.5 = -1.5.
    FuelParams dip;
    dip.b0 = 1.0;
    dip.b1 = -0.2;
    dip.b2 = 0.004;
    dip.b3 = 0.0;
    CHECK_THROWS_AS(dip.validate(), ConfigError);

    // The same shape kept positive passes.
    FuelParams shallow = dip;
    shallow.b0 = 3.0;
    CHECK_NOTHROW(shallow.validate());
}

TEST_CASE("attach_fuel: chain starts burn zero, in-chain samples rate*dt") {
    const FuelParams p;
    std::vector<KinematicSample> samples(3);
    samples[0].speed_mps = 20.0;  // NaN accel and dt: chain start
    samples[1].speed_mps = 21.5;
    samples[1].accel_mps2 = 0.5;
    samples[1].dt_s = 3.0;
    samples[2].speed_mps = 20.0;
    samples[2].accel_mps2 = -0.5;
    samples[2].dt_s = 3.0;
    attach_fuel(samples, p);
    CHECK(samples[0].fuel_ml == 0.0);
    CHECK(samples[1].fuel_ml == fuel_rate_mlps(21.5, 0.5, p) * 3.0);
    CHECK(samples[2].fuel_ml == fuel_rate_mlps(20.0, -0.5, p) * 3.0);
    CHECK(samples[2].fuel_ml == fuel_rate_mlps(20.0, 0.0, p) * 3.0);
}

TEST_CASE("SpeedLimitMap: uniform limits cover everything") {
    const auto m = SpeedLimitMap::uniform(26.8224);
    CHECK(m.limit_at(0.0) == 26.8224);
    CHECK(m.limit_at(123.4) == 26.8224);
    CHECK_NOTHROW(m.validate_coverage(1000.0));
    CHECK_THROWS_AS(SpeedLimitMap::uniform(0.0), ConfigError);
    CHECK_THROWS_AS(SpeedLimitMap::uniform(-5.0), ConfigError);
}

TEST_CASE("SpeedLimitMap: bands are half-open with a covered terminus") {
    const auto m = SpeedLimitMap::from_bands(
        {{2.0, 6.0, 25.0}, {0.0, 2.0, 20.0}});  // unsorted on purpose
    CHECK(m.limit_at(0.0) == 20.0);
    CHECK(m.limit_at(1.999) == 20.0);
    CHECK(m.limit_at(2.0) == 25.0);  // half-open: boundary belongs to the right
    CHECK(m.limit_at(5.999) == 25.0);
    CHECK(m.limit_at(6.0) == 25.0);  // final band covers its own end
    CHECK_FALSE(m.limit_at(6.001).has_value());
    CHECK_FALSE(m.limit_at(-0.001).has_value());
}

TEST_CASE("SpeedLimitMap: malformed bands are configuration errors") {
    CHECK_THROWS_AS(SpeedLimitMap::from_bands({}), ConfigError);
    CHECK_THROWS_AS(SpeedLimitMap::from_bands({{0.0, 0.0, 20.0}}), ConfigError);
    CHECK_THROWS_AS(SpeedLimitMap::from_bands({{0.0, 2.0, 0.0}}), ConfigError);
    CHECK_THROWS_WITH_AS(
        SpeedLimitMap::from_bands({{0.0, 2.0, 20.0}, {1.5, 3.0, 25.0}}),
        doctest::Contains("overlap"), ConfigError);
}

TEST_CASE("SpeedLimitMap: coverage validation finds gaps and short maps") {
    const auto ok = SpeedLimitMap::from_bands({{0.0, 2.0, 20.0}, {2.0, 6.0, 25.0}});
    CHECK_NOTHROW(ok.validate_coverage(6.0));
    CHECK_THROWS_WITH_AS(ok.validate_coverage(6.5), doctest::Contains("ends at"),
                         ConfigError);

    const auto gap = SpeedLimitMap::from_bands({{0.0, 2.0, 20.0}, {3.0, 6.0, 25.0}});
    CHECK_THROWS_WITH_AS(gap.validate_coverage(6.0), doctest::Contains("gap"),
                         ConfigError);
}

TEST_CASE("index_all: limits are sampled at segment midpoints per direction") {
    const SegmentGrid grid(0.5, 6.0);
    const auto limits_eb = SpeedLimitMap::uniform(25.0);
    const auto limits_wb =
        SpeedLimitMap::from_bands({{0.0, 3.0, 20.0}, {3.0, 6.0, 30.0}});

    auto eb = cell(18.0, 2.0, 0.1, 0.05, 1, 2, 0.03);
    eb.key = {Direction::EB, 0, 0};
    auto wb_low = cell(15.0, 1.0, 0.0, 0.0, 0, 0, 0.0);
    wb_low.key = {Direction::WB, 1, 0};  // midpoint 0.75 -> 20 m/s band
    auto wb_high = cell(15.0, 1.0, 0.0, 0.0, 0, 0, 0.0);
    wb_high.key = {Direction::WB, 8, 0};  // midpoint 4.25 -> 30 m/s band

    const IndexWeights w;
    const IndexOptions opts;
    const auto out = index_all({eb, wb_low, wb_high}, grid, grid, limits_eb,
                               limits_wb, w, opts);
    REQUIRE(out.size() == 3);
    CHECK(out[0].safety == safety_index(eb, 25.0, w, opts));
    CHECK(out[0].comfort == comfort_index(eb, w));
    CHECK(out[0].stability == stability_index(eb, w));
    CHECK(out[1].safety == safety_index(wb_low, 20.0, w, opts));
    CHECK(out[2].safety == safety_index(wb_high, 30.0, w, opts));
    // The same 15 m/s traffic is a bigger shortfall against the 30 m/s band.
    CHECK(*out[2].safety > *out[1].safety);
    CHECK_FALSE(out[0].stability_per_waypoint.has_value());
}

TEST_CASE("index_all: the last short segment's midpoint stays on the route") {
    // Route of 5.7 mi: segment 11 spans [5.5, 5.7], midpoint 5.6.
    const SegmentGrid grid(0.5, 5.7);
    const auto limits = SpeedLimitMap::from_bands({{0.0, 5.7, 25.0}});
    auto m = cell(20.0, 1.0, 0.0, 0.0, 0, 0, 0.0);
    m.key = {Direction::EB, 11, 0};
    const auto out = index_all({m}, grid, grid, limits, limits, IndexWeights{},
                               IndexOptions{});
    REQUIRE(out.size() == 1);
    CHECK(out[0].safety == safety_index(m, 25.0, IndexWeights{}, IndexOptions{}));
}

TEST_CASE("index_all: a missing limit is an input error, not a default") {
    const SegmentGrid grid(0.5, 6.0);
    const auto short_map = SpeedLimitMap::from_bands({{0.0, 3.0, 25.0}});
    auto m = cell(20.0, 1.0, 0.0, 0.0, 0, 0, 0.0);
    m.key = {Direction::EB, 11, 0};  // midpoint 5.75: uncovered
    CHECK_THROWS_WITH_AS(index_all({m}, grid, grid, short_map, short_map,
                                   IndexWeights{}, IndexOptions{}),
                         doctest::Contains("MissingSpeedLimit"), InputError);
}

TEST_CASE("index_all: optional per-waypoint stability column") {
    const SegmentGrid grid(0.5, 6.0);
    const auto limits = SpeedLimitMap::uniform(25.0);
    auto m = cell(20.0, 1.0, 0.0, 0.0, 4, 6, 0.0);
    m.key = {Direction::EB, 2, 0};
    IndexOptions opts;
    opts.emit_per_waypoint_stability = true;
    const auto out =
        index_all({m}, grid, grid, limits, limits, IndexWeights{}, opts);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].stability_per_waypoint.has_value());
    CHECK(*out[0].stability_per_waypoint == 10.0 / 100.0);
    CHECK(out[0].stability == 10.0);
}
