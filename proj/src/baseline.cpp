#include "tprof/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tprof/errors.hpp"
#include "tprof/util.hpp"

namespace tprof {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

struct SlotAcc {
    std::int64_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
};

}  // namespace

std::string_view to_string(DayType d) {
    return d == DayType::weekday ? "weekday" : "weekend";
}

std::optional<DayType> parse_day_type(std::string_view s) {
    if (s == "weekday") return DayType::weekday;
    if (s == "weekend") return DayType::weekend;
    return std::nullopt;
}

DayType day_type_of(std::int64_t timestamp_ms) {
    const int dow = util::utc_day_of_week(timestamp_ms);
    return (dow == 0 || dow == 6) ? DayType::weekend : DayType::weekday;
}

SlotKey slot_of(Direction dir, std::int32_t segment, std::int32_t interval,
                std::int64_t epoch_start_ms, std::int64_t interval_ms) {
    const std::int64_t t_start =
        epoch_start_ms + static_cast<std::int64_t>(interval) * interval_ms;
    std::int64_t ms_of_day = t_start % kMsPerDay;
    if (ms_of_day < 0) ms_of_day += kMsPerDay;
    return SlotKey{dir, segment, static_cast<std::int32_t>(ms_of_day / interval_ms),
                   day_type_of(t_start)};
}

BaselineProfile build_baseline(const std::vector<ValueTable>& daily_tables,
                               std::int64_t min_days) {
    if (daily_tables.empty()) {
        throw InputError("GridMismatch: no daily tables given");
    }
    const ValueTable& first = daily_tables.front();
    BaselineProfile profile;
    profile.min_days = min_days;
    profile.segment_length_miles = meta_double(first.meta, "segment_length_miles");
    profile.interval_minutes = meta_double(first.meta, "interval_minutes");
    profile.metrics = first.columns;

    std::map<SlotKey, std::vector<SlotAcc>> accs;
    for (const ValueTable& t : daily_tables) {
        const double seg_len = meta_double(t.meta, "segment_length_miles");
        const double itv_min = meta_double(t.meta, "interval_minutes");
        if (seg_len != profile.segment_length_miles ||
            itv_min != profile.interval_minutes) {
            throw InputError(
                "GridMismatch: daily tables disagree on segment_length_miles / "
                "interval_minutes");
        }
        if (t.columns != profile.metrics) {
            throw InputError("GridMismatch: daily tables disagree on columns");
        }
        const std::int64_t epoch = meta_int64(t.meta, "epoch_start_ms");
        const auto interval_ms =
            static_cast<std::int64_t>(std::llround(itv_min * 60000.0));
        for (const TableRow& row : t.rows) {
            const SlotKey key =
                slot_of(row.direction, row.segment, row.interval, epoch, interval_ms);
            auto& slot = accs[key];
            slot.resize(profile.metrics.size());
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                if (!row.values[i]) continue;
                SlotAcc& a = slot[i];
                ++a.n;
                a.sum += *row.values[i];
                a.sum_sq += *row.values[i] * *row.values[i];
            }
        }
    }

    for (const auto& [key, slot] : accs) {
        std::vector<std::optional<SlotStat>> stats(slot.size());
        for (std::size_t i = 0; i < slot.size(); ++i) {
            const SlotAcc& a = slot[i];
            if (a.n == 0) continue;
            const double mean = a.sum / static_cast<double>(a.n);
            const double var = a.sum_sq / static_cast<double>(a.n) - mean * mean;
            stats[i] = SlotStat{mean, std::sqrt(var > 0.0 ? var : 0.0), a.n};
        }
        profile.slots.emplace(key, std::move(stats));
    }
    return profile;
}

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::info: return "info";
        case Severity::warn: return "warn";
        case Severity::alert: return "alert";
    }
    return "info";
}

std::optional<Polarity> metric_polarity(const std::string& metric) {
    if (metric == "mean_speed_mps" || metric == "n_vehicles") {
        return Polarity::low_bad;
    }
    if (metric == "std_speed_mps" || metric == "pct_brakes" ||
        metric == "pct_high_jerk" || metric == "hard_accel_count" ||
        metric == "hard_brake_count" || metric == "avg_heading_change" ||
        metric == "avg_fuel_ml_per_veh" || metric == "safety_index" ||
        metric == "comfort_index" || metric == "stability_index") {
        return Polarity::high_bad;
    }
    return std::nullopt;  // raw volume bookkeeping, not monitored
}

std::vector<AnomalyFlag> detect_anomalies(const ValueTable& current,
                                          const BaselineProfile& baseline,
                                          const DetectParams& params) {
    if (meta_double(current.meta, "segment_length_miles") !=
            baseline.segment_length_miles ||
        meta_double(current.meta, "interval_minutes") !=
            baseline.interval_minutes) {
        throw InputError(
            "GridMismatch: current table's grid differs from the baseline's");
    }
    const std::int64_t epoch = meta_int64(current.meta, "epoch_start_ms");
    const auto interval_ms = static_cast<std::int64_t>(
        std::llround(baseline.interval_minutes * 60000.0));

    // Column index in the current table for each baseline metric.
    std::vector<int> col_ix(baseline.metrics.size());
    for (std::size_t i = 0; i < baseline.metrics.size(); ++i) {
        col_ix[i] = current.column_ix(baseline.metrics[i]);
    }

    std::vector<AnomalyFlag> flags;
    for (const TableRow& row : current.rows) {
        const SlotKey key =
            slot_of(row.direction, row.segment, row.interval, epoch, interval_ms);
        const auto slot_it = baseline.slots.find(key);
        if (slot_it == baseline.slots.end()) continue;  // no history
        const auto& stats = slot_it->second;
        for (std::size_t i = 0; i < baseline.metrics.size(); ++i) {
            if (col_ix[i] < 0 || !stats[i]) continue;
            if (stats[i]->days < baseline.min_days) continue;  // low confidence
            const auto polarity = metric_polarity(baseline.metrics[i]);
            if (!polarity) continue;
            const auto& value = row.values[static_cast<std::size_t>(col_ix[i])];
            if (!value) continue;
            const double floor = params.std_floor_frac * std::abs(stats[i]->mean);
            const double denom = std::max({stats[i]->stdev, floor, 1e-12});
            const double z = (*value - stats[i]->mean) / denom;
            const bool bad = *polarity == Polarity::low_bad
                                 ? z <= -params.warn_z
                                 : z >= params.warn_z;
            if (!bad) continue;
            AnomalyFlag f;
            f.key = {row.direction, row.segment, row.interval};
            f.metric = baseline.metrics[i];
            f.observed = *value;
            f.baseline_mean = stats[i]->mean;
            f.z = z;
            f.severity =
                std::abs(z) >= params.alert_z ? Severity::alert : Severity::warn;
            flags.push_back(std::move(f));
        }
    }
    std::sort(flags.begin(), flags.end(),
              [](const AnomalyFlag& a, const AnomalyFlag& b) {
                  return std::tie(a.key.direction, a.key.segment, a.key.interval,
                                  a.metric) < std::tie(b.key.direction,
                                                       b.key.segment,
                                                       b.key.interval, b.metric);
              });
    return flags;
}

void write_baseline(const std::string& path, const BaselineProfile& profile) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    out << "# segment_length_miles = "
        << util::format_double(profile.segment_length_miles) << "\n";
    out << "# interval_minutes = " << util::format_double(profile.interval_minutes)
        << "\n";
    out << "# min_days = " << profile.min_days << "\n";
    out << "direction,segment,interval,day_type";
    for (const auto& m : profile.metrics) {
        out << "," << m << "_mean," << m << "_std," << m << "_days";
    }
    out << "\n";
    for (const auto& [key, stats] : profile.slots) {
        out << to_string(key.direction) << "," << key.segment << ","
            << key.interval_of_day << "," << to_string(key.day_type);
        for (const auto& s : stats) {
            if (s) {
                out << "," << util::format_double(s->mean) << ","
                    << util::format_double(s->stdev) << "," << s->days;
            } else {
                out << ",,,";
            }
        }
        out << "\n";
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

BaselineProfile read_baseline(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("FileOpen: cannot read '" + path + "'");
    }
    BaselineProfile profile;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool meta_seg = false, meta_itv = false;
    auto fail = [&](const std::string& why) {
        throw InputError("BaselineParse: " + path + ":" + std::to_string(line_no) +
                         ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = std::string(util::trim(line));
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            const auto body = util::trim(std::string_view(trimmed).substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = std::string(util::trim(body.substr(0, eq)));
            const std::string value = std::string(util::trim(body.substr(eq + 1)));
            if (key == "segment_length_miles") {
                const auto v = util::parse_double(value);
                if (!v) fail("bad segment_length_miles");
                profile.segment_length_miles = *v;
                meta_seg = true;
            } else if (key == "interval_minutes") {
                const auto v = util::parse_double(value);
                if (!v) fail("bad interval_minutes");
                profile.interval_minutes = *v;
                meta_itv = true;
            } else if (key == "min_days") {
                const auto v = util::parse_int64(value);
                if (!v) fail("bad min_days");
                profile.min_days = *v;
            }
            continue;
        }
        const auto fields = util::split_csv(trimmed);
        if (!header_seen) {
            if (fields.size() < 4 || fields[0] != "direction" ||
                fields[1] != "segment" || fields[2] != "interval" ||
                fields[3] != "day_type" || (fields.size() - 4) % 3 != 0) {
                fail("unexpected baseline header");
            }
            for (std::size_t i = 4; i < fields.size(); i += 3) {
                const std::string& name = fields[i];
                if (name.size() < 5 || name.substr(name.size() - 5) != "_mean") {
                    fail("expected *_mean column, got '" + name + "'");
                }
                profile.metrics.push_back(name.substr(0, name.size() - 5));
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4 + 3 * profile.metrics.size()) {
            fail("wrong field count");
        }
        const auto dir = parse_direction(fields[0]);
        const auto seg = util::parse_int64(fields[1]);
        const auto itv = util::parse_int64(fields[2]);
        const auto day = parse_day_type(fields[3]);
        if (!dir || !seg || !itv || !day) fail("bad slot key");
        SlotKey key{*dir, static_cast<std::int32_t>(*seg),
                    static_cast<std::int32_t>(*itv), *day};
        std::vector<std::optional<SlotStat>> stats(profile.metrics.size());
        for (std::size_t i = 0; i < profile.metrics.size(); ++i) {
            const std::string& mean_s = fields[4 + 3 * i];
            const std::string& std_s = fields[5 + 3 * i];
            const std::string& days_s = fields[6 + 3 * i];
            if (mean_s.empty() && std_s.empty() && days_s.empty()) continue;
            const auto mean = util::parse_double(mean_s);
            const auto stdev = util::parse_double(std_s);
            const auto days = util::parse_int64(days_s);
            if (!mean || !stdev || !days) fail("bad stat triple");
            stats[i] = SlotStat{*mean, *stdev, *days};
        }
        profile.slots.emplace(key, std::move(stats));
    }
    if (!header_seen) {
        throw InputError("BaselineParse: " + path + ": no header line found");
    }
    if (!meta_seg || !meta_itv) {
        throw InputError("BaselineParse: " + path +
                         ": missing grid metadata comments");
    }
    return profile;
}

void write_anomalies(const std::string& path,
                     const std::vector<AnomalyFlag>& flags) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("FileOpen: cannot write '" + path + "'");
    }
    out << "direction,segment,interval,metric,observed,mean,z,severity\n";
    for (const AnomalyFlag& f : flags) {
        out << to_string(f.key.direction) << "," << f.key.segment << ","
            << f.key.interval << "," << f.metric << ","
            << util::format_double(f.observed) << ","
            << util::format_double(f.baseline_mean) << ","
            << util::format_double(f.z) << "," << to_string(f.severity) << "\n";
    }
    if (!out) {
        throw InputError("FileWrite: short write to '" + path + "'");
    }
}

}  // namespace tprof
