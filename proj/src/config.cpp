#include "tprof/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "tprof/errors.hpp"
#include "tprof/util.hpp"

namespace tprof {

namespace {

bool parse_bool(const std::string& s, const std::string& key) {
    const auto v = util::parse_bool(s);
    if (!v) {
        throw ConfigError("BadValue: '" + key + "' expects a boolean, got '" + s +
                          "'");
    }
    return *v;
}

double parse_num(const std::string& s, const std::string& key) {
    const auto v = util::parse_double(s);
    if (!v) {
        throw ConfigError("BadValue: '" + key + "' expects a number, got '" + s +
                          "'");
    }
    return *v;
}

std::int64_t parse_int(const std::string& s, const std::string& key) {
    const auto v = util::parse_int64(s);
    if (!v) {
        throw ConfigError("BadValue: '" + key + "' expects an integer, got '" + s +
                          "'");
    }
    return *v;
}

// Key table: name -> setter. Declared once so config_keys(), the file
// loader, and the env sweep stay in lockstep.
using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& key_table() {
    auto num = [](double RunConfig::* f) {
        return [f](RunConfig& c, const std::string& v) {
            c.*f = parse_num(v, "numeric");
        };
    };
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"segment_length_miles", num(&RunConfig::segment_length_miles)},
        {"interval_minutes", num(&RunConfig::interval_minutes)},
        {"epoch_start_ms",
         [](RunConfig& c, const std::string& v) {
             c.epoch_start_ms = parse_int(v, "epoch_start_ms");
         }},
        {"max_offset_m", num(&RunConfig::max_offset_m)},
        {"gap_split_ms",
         [](RunConfig& c, const std::string& v) {
             c.gap_split_ms = parse_int(v, "gap_split_ms");
         }},
        {"max_dt_ms",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.max_dt_ms = parse_int(v, "max_dt_ms");
         }},
        {"brake_mps2",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.brake_accel_max = parse_num(v, "brake_mps2");
         }},
        {"hard_brake_mps2",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.hard_brake_max = parse_num(v, "hard_brake_mps2");
         }},
        {"hard_accel_mps2",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.hard_accel_min = parse_num(v, "hard_accel_mps2");
         }},
        {"high_jerk_pos_mps3",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.jerk_pos_min = parse_num(v, "high_jerk_pos_mps3");
         }},
        {"high_jerk_neg_mps3",
         [](RunConfig& c, const std::string& v) {
             c.thresholds.jerk_neg_max = parse_num(v, "high_jerk_neg_mps3");
         }},
        {"w_safety_var_coef",
         [](RunConfig& c, const std::string& v) {
             c.weights.safety_var_coef = parse_num(v, "w_safety_var_coef");
         }},
        {"w_safety_speed_drop",
         [](RunConfig& c, const std::string& v) {
             c.weights.safety_speed_drop = parse_num(v, "w_safety_speed_drop");
         }},
        {"w_safety_heading",
         [](RunConfig& c, const std::string& v) {
             c.weights.safety_heading = parse_num(v, "w_safety_heading");
         }},
        {"w_comfort_brakes",
         [](RunConfig& c, const std::string& v) {
             c.weights.comfort_brakes = parse_num(v, "w_comfort_brakes");
         }},
        {"w_comfort_jerk",
         [](RunConfig& c, const std::string& v) {
             c.weights.comfort_jerk = parse_num(v, "w_comfort_jerk");
         }},
        {"w_stability_hard_accel",
         [](RunConfig& c, const std::string& v) {
             c.weights.stability_hard_accel =
                 parse_num(v, "w_stability_hard_accel");
         }},
        {"w_stability_hard_brake",
         [](RunConfig& c, const std::string& v) {
             c.weights.stability_hard_brake =
                 parse_num(v, "w_stability_hard_brake");
         }},
        {"fuel_b0",
         [](RunConfig& c, const std::string& v) { c.fuel.b0 = parse_num(v, "fuel_b0"); }},
        {"fuel_b1",
         [](RunConfig& c, const std::string& v) { c.fuel.b1 = parse_num(v, "fuel_b1"); }},
        {"fuel_b2",
         [](RunConfig& c, const std::string& v) { c.fuel.b2 = parse_num(v, "fuel_b2"); }},
        {"fuel_b3",
         [](RunConfig& c, const std::string& v) { c.fuel.b3 = parse_num(v, "fuel_b3"); }},
        {"fuel_c0",
         [](RunConfig& c, const std::string& v) { c.fuel.c0 = parse_num(v, "fuel_c0"); }},
        {"fuel_c1",
         [](RunConfig& c, const std::string& v) { c.fuel.c1 = parse_num(v, "fuel_c1"); }},
        {"fuel_c2",
         [](RunConfig& c, const std::string& v) { c.fuel.c2 = parse_num(v, "fuel_c2"); }},
        {"speed_limit_mps", num(&RunConfig::speed_limit_mps)},
        {"speed_limits_eb",
         [](RunConfig& c, const std::string& v) { c.speed_limits_eb = v; }},
        {"speed_limits_wb",
         [](RunConfig& c, const std::string& v) { c.speed_limits_wb = v; }},
        {"deterministic_mode",
         [](RunConfig& c, const std::string& v) {
             c.deterministic_mode = parse_bool(v, "deterministic_mode");
         }},
        {"signed_speed_drop",
         [](RunConfig& c, const std::string& v) {
             c.signed_speed_drop = parse_bool(v, "signed_speed_drop");
         }},
        {"emit_stability_per_waypoint",
         [](RunConfig& c, const std::string& v) {
             c.emit_stability_per_waypoint =
                 parse_bool(v, "emit_stability_per_waypoint");
         }},
        {"baseline_min_days",
         [](RunConfig& c, const std::string& v) {
             c.baseline_min_days = parse_int(v, "baseline_min_days");
         }},
        {"anomaly_warn_z", num(&RunConfig::anomaly_warn_z)},
        {"anomaly_alert_z", num(&RunConfig::anomaly_alert_z)},
        {"anomaly_std_floor_frac", num(&RunConfig::anomaly_std_floor_frac)},
    };
    return table;
}

std::vector<SpeedLimitBand> parse_bands(const std::string& spec,
                                        const std::string& key) {
    std::vector<SpeedLimitBand> bands;
    auto bad = [&](const std::string& token) {
        throw ConfigError("BadValue: '" + key + "' entry '" + token +
                          "' is not 'start-end:limit_mps'");
    };
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string token(util::trim(
            spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                        : comma - pos)));
        pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
        if (token.empty()) continue;
        const std::size_t colon = token.find(':');
        if (colon == std::string::npos) bad(token);
        const std::string range = token.substr(0, colon);
        const std::size_t dash = range.find('-');
        if (dash == std::string::npos) bad(token);
        const auto start = util::parse_double(util::trim(range.substr(0, dash)));
        const auto end = util::parse_double(util::trim(range.substr(dash + 1)));
        const auto limit =
            util::parse_double(util::trim(token.substr(colon + 1)));
        if (!start || !end || !limit) bad(token);
        bands.push_back({*start, *end, *limit});
    }
    return bands;
}

}  // namespace

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& why) {
        if (!ok) throw ConfigError("BadValue: " + why);
    };
    require(segment_length_miles > 0.0, "segment_length_miles must be > 0");
    require(interval_minutes > 0.0, "interval_minutes must be > 0");
    require(max_offset_m > 0.0 && max_offset_m <= 1000.0,
            "max_offset_m must be in (0, 1000]");
    require(gap_split_ms > 0, "gap_split_ms must be > 0");
    require(speed_limit_mps > 0.0, "speed_limit_mps must be > 0");
    require(baseline_min_days >= 1, "baseline_min_days must be >= 1");
    require(anomaly_warn_z > 0.0, "anomaly_warn_z must be > 0");
    require(anomaly_alert_z >= anomaly_warn_z,
            "anomaly_alert_z must be >= anomaly_warn_z");
    require(anomaly_std_floor_frac >= 0.0,
            "anomaly_std_floor_frac must be >= 0");
    thresholds.validate();
    fuel.validate();
    if (!speed_limits_eb.empty()) parse_bands(speed_limits_eb, "speed_limits_eb");
    if (!speed_limits_wb.empty()) parse_bands(speed_limits_wb, "speed_limits_wb");
}

SpeedLimitMap RunConfig::limits_for(Direction d, double route_length_mi) const {
    const std::string& spec =
        d == Direction::EB ? speed_limits_eb : speed_limits_wb;
    if (spec.empty()) return SpeedLimitMap::uniform(speed_limit_mps);
    auto map = SpeedLimitMap::from_bands(parse_bands(
        spec, d == Direction::EB ? "speed_limits_eb" : "speed_limits_wb"));
    map.validate_coverage(route_length_mi);
    return map;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("FileOpen: cannot read '" + path + "'");
    }
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = std::string(util::trim(line));
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("BadLine: " + path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = std::string(util::trim(body.substr(0, eq)));
        const std::string value = std::string(util::trim(body.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError("BadLine: " + path + ":" + std::to_string(line_no) +
                              ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
    for (const auto& [name, setter] : key_table()) {
        if (name == key) {
            try {
                setter(cfg, value);
            } catch (const ConfigError&) {
                // Re-throw with the real key name (table setters built by
                // the generic helper only know a placeholder).
                throw ConfigError("BadValue: '" + key + "' cannot parse '" +
                                  value + "'");
            }
            return;
        }
    }
    throw ConfigError("UnknownKey: '" + key + "' is not a config key");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        k.reserve(key_table().size());
        for (const auto& [name, setter] : key_table()) k.push_back(name);
        return k;
    }();
    return keys;
}

RunConfig load_config(const std::optional<std::string>& path) {
    RunConfig cfg;
    if (path) {
        for (const auto& [key, value] : parse_kv_file(*path)) {
            apply_config_key(cfg, key, value);
        }
    }
    // Environment overrides: TPROF_SEGMENT_LENGTH_MILES etc. win over the
    // file so a run can be tweaked without editing it.
    for (const std::string& key : config_keys()) {
        std::string env_name = "TPROF_";
        for (char c : key) {
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        if (const char* v = std::getenv(env_name.c_str())) {
            apply_config_key(cfg, key, v);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace tprof
