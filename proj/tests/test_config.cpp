#include <cstdlib>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "tprof/config.hpp"
#include "tprof/errors.hpp"

using namespace tprof;
using test::TempDir;
using test::write_file;

namespace {

// Sets an environment variable for one scope; always restores on exit so a
// failing assertion cannot leak overrides into later tests.
class EnvGuard {
public:
    EnvGuard(const char* name, const char* value) : name_(name) {
        ::setenv(name, value, 1);
    }
    ~EnvGuard() { ::unsetenv(name_); }
    EnvGuard(const EnvGuard&) = delete;
    EnvGuard& operator=(const EnvGuard&) = delete;

private:
    const char* name_;
};

}  // namespace

TEST_CASE("the default configuration is valid") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.segment_length_miles == 0.5);
    CHECK(cfg.interval_minutes == 30.0);
    CHECK_FALSE(cfg.epoch_start_ms.has_value());
    CHECK(cfg.max_offset_m == 50.0);
    CHECK(cfg.gap_split_ms == 30000);
    CHECK(cfg.speed_limit_mps == 29.0576);
    CHECK(cfg.thresholds.hard_brake_max == -2.638);
    CHECK(cfg.deterministic_mode);
}

TEST_CASE("parse_kv_file: comments, blanks, and last-wins duplicates") {
    TempDir tmp;
    const std::string path = tmp.file("run.conf");
    write_file(path,
               "# run configuration\n"
               "segment_length_miles = 0.5\n"
               "\n"
               "interval_minutes = 15   # quarter-hour bins\n"
               "segment_length_miles = 0.25\r\n"
               "speed_limits_eb = 0-2:20,2-6:25\n");
    const auto kv = parse_kv_file(path);
    CHECK(kv.size() == 3);
    CHECK(kv.at("segment_length_miles") == "0.25");  // later line wins
    CHECK(kv.at("interval_minutes") == "15");
    CHECK(kv.at("speed_limits_eb") == "0-2:20,2-6:25");
}

TEST_CASE("parse_kv_file: malformed lines carry their line number") {
    TempDir tmp;
    const std::string path = tmp.file("bad.conf");
    write_file(path, "interval_minutes = 30\nno equals sign here\n");
    CHECK_THROWS_WITH_AS(parse_kv_file(path), doctest::Contains(":2"),
                         ConfigError);

    const std::string empty_key = tmp.file("empty_key.conf");
    write_file(empty_key, " = 12\n");
    CHECK_THROWS_WITH_AS(parse_kv_file(empty_key), doctest::Contains("empty key"),
                         ConfigError);

    CHECK_THROWS_WITH_AS(parse_kv_file(tmp.file("missing.conf")),
                         doctest::Contains("FileOpen"), InputError);
}

TEST_CASE("apply_config_key routes values to the right fields") {
    RunConfig cfg;
    apply_config_key(cfg, "segment_length_miles", "0.7");
    CHECK(cfg.segment_length_miles == 0.7);
    apply_config_key(cfg, "epoch_start_ms", "1622505600000");
    CHECK(cfg.epoch_start_ms == 1622505600000LL);
    apply_config_key(cfg, "brake_mps2", "-1.2");
    CHECK(cfg.thresholds.brake_accel_max == -1.2);
    apply_config_key(cfg, "hard_accel_mps2", "4.0");
    CHECK(cfg.thresholds.hard_accel_min == 4.0);
    apply_config_key(cfg, "w_comfort_jerk", "2.5");
    CHECK(cfg.weights.comfort_jerk == 2.5);
    apply_config_key(cfg, "fuel_b2", "-8e-4");
    CHECK(cfg.fuel.b2 == -8e-4);
    apply_config_key(cfg, "deterministic_mode", "false");
    CHECK_FALSE(cfg.deterministic_mode);
    apply_config_key(cfg, "deterministic_mode", "on");
    CHECK(cfg.deterministic_mode);
    apply_config_key(cfg, "signed_speed_drop", "1");
    CHECK(cfg.signed_speed_drop);
    apply_config_key(cfg, "anomaly_alert_z", "3.5");
    CHECK(cfg.anomaly_alert_z == 3.5);
}

TEST_CASE("unknown keys and bad values name the offender") {
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(apply_config_key(cfg, "segment_length_mile", "0.5"),
                         doctest::Contains("segment_length_mile"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config_key(cfg, "max_offset_m", "wide"),
                         doctest::Contains("max_offset_m"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config_key(cfg, "deterministic_mode", "maybe"),
                         doctest::Contains("deterministic_mode"), ConfigError);
}

TEST_CASE("config_keys lists every key exactly once") {
    const auto& keys = config_keys();
    CHECK(keys.size() >= 30);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t j = i + 1; j < keys.size(); ++j) {
            CHECK(keys[i] != keys[j]);
        }
        RunConfig cfg;
        // Every advertised key must be applicable (value errors aside).
        try {
            apply_config_key(cfg, keys[i], "1");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("UnknownKey") == std::string::npos);
        }
    }
}

TEST_CASE("load_config: defaults, then file, then environment") {
    TempDir tmp;
    const std::string path = tmp.file("run.conf");
    write_file(path,
               "segment_length_miles = 0.25\n"
               "interval_minutes = 15\n"
               "speed_limit_mps = 26.8224\n");

    const RunConfig from_file = load_config(path);
    CHECK(from_file.segment_length_miles == 0.25);
    CHECK(from_file.interval_minutes == 15.0);
    CHECK(from_file.speed_limit_mps == 26.8224);
    CHECK(from_file.max_offset_m == 50.0);  // untouched default

    {
        EnvGuard env("TPROF_SEGMENT_LENGTH_MILES", "0.1");
        const RunConfig with_env = load_config(path);
        CHECK(with_env.segment_length_miles == 0.1);      // env beats file
        CHECK(with_env.interval_minutes == 15.0);         // file still applies
    }
    const RunConfig after = load_config(path);
    CHECK(after.segment_length_miles == 0.25);  // guard removed the override

    const RunConfig defaults = load_config(std::nullopt);
    CHECK(defaults.segment_length_miles == 0.5);
}

TEST_CASE("load_config: unknown file keys and bad env values throw") {
    TempDir tmp;
    const std::string path = tmp.file("typo.conf");
    write_file(path, "segment_length_mile = 0.5\n");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("UnknownKey"),
                         ConfigError);

    const std::string ok = tmp.file("ok.conf");
    write_file(ok, "interval_minutes = 30\n");
    EnvGuard env("TPROF_MAX_OFFSET_M", "very wide");
    CHECK_THROWS_WITH_AS(load_config(ok), doctest::Contains("max_offset_m"),
                         ConfigError);
}

TEST_CASE("validate: rejects out-of-range settings") {
    auto expect_invalid = [](void (*mutate)(RunConfig&), const char* what) {
        RunConfig cfg;
        mutate(cfg);
        CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains(what),
                             ConfigError);
    };
    expect_invalid([](RunConfig& c) { c.segment_length_miles = 0.0; },
                   "segment_length_miles");
    expect_invalid([](RunConfig& c) { c.interval_minutes = -30.0; },
                   "interval_minutes");
    expect_invalid([](RunConfig& c) { c.max_offset_m = 0.0; }, "max_offset_m");
    expect_invalid([](RunConfig& c) { c.max_offset_m = 5000.0; }, "max_offset_m");
    expect_invalid([](RunConfig& c) { c.gap_split_ms = 0; }, "gap_split_ms");
    expect_invalid([](RunConfig& c) { c.speed_limit_mps = 0.0; },
                   "speed_limit_mps");
    expect_invalid([](RunConfig& c) { c.baseline_min_days = 0; },
                   "baseline_min_days");
    expect_invalid([](RunConfig& c) { c.anomaly_warn_z = 0.0; },
                   "anomaly_warn_z");
    expect_invalid([](RunConfig& c) { c.anomaly_alert_z = 1.0; },  // below warn
                   "anomaly_alert_z");
    expect_invalid([](RunConfig& c) { c.anomaly_std_floor_frac = -0.1; },
                   "anomaly_std_floor_frac");
    expect_invalid([](RunConfig& c) { c.thresholds.hard_brake_max = -0.5; },
                   "thresholds");
    expect_invalid([](RunConfig& c) { c.fuel.b0 = -1.0; }, "InvalidFuelModel");
    expect_invalid([](RunConfig& c) { c.speed_limits_eb = "0-2"; },
                   "speed_limits_eb");
}

TEST_CASE("limits_for: uniform fallback and per-direction band strings") {
    RunConfig cfg;
    const auto uniform = cfg.limits_for(Direction::EB, 6.0);
    CHECK(uniform.limit_at(3.0) == 29.0576);

    cfg.speed_limits_eb = "0-2:20, 2-6:25";
    cfg.speed_limits_wb = "";  // WB keeps the uniform limit
    const auto eb = cfg.limits_for(Direction::EB, 6.0);
    CHECK(eb.limit_at(1.0) == 20.0);
    CHECK(eb.limit_at(2.0) == 25.0);
    CHECK(eb.limit_at(6.0) == 25.0);
    const auto wb = cfg.limits_for(Direction::WB, 6.0);
    CHECK(wb.limit_at(5.9) == 29.0576);

    // The band string must cover the whole route.
    CHECK_THROWS_WITH_AS(cfg.limits_for(Direction::EB, 10.0),
                         doctest::Contains("ends at"), ConfigError);
}

TEST_CASE("limits_for: malformed band strings are config errors") {
    RunConfig cfg;
    for (const char* bad : {"0-2", "0:20", "a-b:20", "0-2:fast", "0-2;20"}) {
        cfg.speed_limits_wb = bad;
        CHECK_THROWS_WITH_AS(cfg.limits_for(Direction::WB, 2.0),
                             doctest::Contains("speed_limits_wb"), ConfigError);
    }
}
