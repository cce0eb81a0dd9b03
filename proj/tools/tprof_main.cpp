// tprof: batch trajectory profiling for corridor waypoint data.
//
// Subcommands: profile, indices, baseline build, baseline detect, render,
// synth. Exit codes: 0 success, 1 usage, 2 input/config error, 3 internal
// invariant violation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tprof/baseline.hpp"
#include "tprof/config.hpp"
#include "tprof/errors.hpp"
#include "tprof/kernels.hpp"
#include "tprof/pipeline.hpp"
#include "tprof/render.hpp"
#include "tprof/synth.hpp"
#include "tprof/table.hpp"
#include "tprof/util.hpp"

namespace {

using namespace tprof;

struct CommonArgs {
    std::optional<std::string> config_path;
    int threads = 1;
};

RunConfig config_for(const CommonArgs& args) {
    return load_config(args.config_path);
}

int cmd_profile(const CommonArgs& common, const std::string& waypoints,
                const std::string& route, const std::string& out) {
    const RunConfig cfg = config_for(common);
    const ProfileResult result =
        run_profile(waypoints, route, cfg, common.threads);
    write_table(out, metrics_to_table(result.cells, result.meta));

    const ProfileStats& s = result.stats;
    std::printf("waypoints  %llu data lines, %llu parsed, %llu rejected\n",
                (unsigned long long)s.data_lines, (unsigned long long)s.records,
                (unsigned long long)s.rejected_lines);
    std::printf("journeys   %llu (%llu gap-split parts)\n",
                (unsigned long long)s.journeys,
                (unsigned long long)s.split_parts);
    std::printf("samples    %llu matched, %llu off-route, %llu pre-epoch\n",
                (unsigned long long)s.matched_samples,
                (unsigned long long)s.off_route, (unsigned long long)s.pre_epoch);
    std::printf("cells      %llu (epoch %lld ms, %s-min intervals, %s-mi segments)\n",
                (unsigned long long)s.cells, (long long)s.epoch_start_ms,
                util::format_double(cfg.interval_minutes).c_str(),
                util::format_double(cfg.segment_length_miles).c_str());
    std::printf("kernels    %s\n", kernels::backend_name(kernels::active_backend()));
    std::printf("wrote      %s\n", out.c_str());
    return 0;
}

int cmd_indices(const CommonArgs& common, const std::string& metrics_path,
                const std::string& out) {
    const RunConfig cfg = config_for(common);
    const ValueTable table = read_table(metrics_path);
    const std::vector<CellMetrics> cells = table_to_metrics(table);

    bool has_eb = false, has_wb = false;
    for (const CellMetrics& m : cells) {
        (m.key.direction == Direction::EB ? has_eb : has_wb) = true;
    }
    const double seg_len = meta_double(table.meta, "segment_length_miles");
    // Absent directions get a degenerate one-segment grid; nothing reads it.
    const double len_eb =
        has_eb ? meta_double(table.meta, "route_length_miles_eb") : seg_len;
    const double len_wb =
        has_wb ? meta_double(table.meta, "route_length_miles_wb") : seg_len;
    const SegmentGrid grid_eb(seg_len, len_eb);
    const SegmentGrid grid_wb(seg_len, len_wb);

    IndexOptions opts;
    opts.signed_speed_drop = cfg.signed_speed_drop;
    opts.emit_per_waypoint_stability = cfg.emit_stability_per_waypoint;
    const std::vector<IndexedCell> indexed =
        index_all(cells, grid_eb, grid_wb, cfg.limits_for(Direction::EB, len_eb),
                  cfg.limits_for(Direction::WB, len_wb), cfg.weights, opts);
    write_table(out, indexed_to_table(indexed, table.meta,
                                      cfg.emit_stability_per_waypoint));

    std::size_t unscored = 0;
    for (const IndexedCell& c : indexed) {
        if (!c.safety) ++unscored;
    }
    std::printf("indexed    %zu cells (%zu unscored safety)\n", indexed.size(),
                unscored);
    std::printf("wrote      %s\n", out.c_str());
    return 0;
}

int cmd_baseline_build(const CommonArgs& common,
                       const std::vector<std::string>& daily_paths,
                       const std::string& out) {
    const RunConfig cfg = config_for(common);
    std::vector<ValueTable> tables;
    tables.reserve(daily_paths.size());
    for (const auto& p : daily_paths) tables.push_back(read_table(p));
    const BaselineProfile profile =
        build_baseline(tables, cfg.baseline_min_days);

    std::size_t low_confidence = 0;
    for (const auto& [key, stats] : profile.slots) {
        for (const auto& s : stats) {
            if (s && s->days < profile.min_days) {
                ++low_confidence;
                break;
            }
        }
    }
    write_baseline(out, profile);
    std::printf("baseline   %zu slots from %zu daily tables (%zu low-confidence)\n",
                profile.slots.size(), tables.size(), low_confidence);
    std::printf("wrote      %s\n", out.c_str());
    return 0;
}

int cmd_baseline_detect(const CommonArgs& common, const std::string& metrics_path,
                        const std::string& baseline_path, const std::string& out) {
    const RunConfig cfg = config_for(common);
    const ValueTable current = read_table(metrics_path);
    const BaselineProfile profile = read_baseline(baseline_path);
    const DetectParams params{cfg.anomaly_warn_z, cfg.anomaly_alert_z,
                              cfg.anomaly_std_floor_frac};
    const std::vector<AnomalyFlag> flags =
        detect_anomalies(current, profile, params);
    write_anomalies(out, flags);

    std::size_t alerts = 0;
    for (const AnomalyFlag& f : flags) {
        if (f.severity == Severity::alert) ++alerts;
    }
    std::printf("anomalies  %zu flags (%zu alert, %zu warn)\n", flags.size(),
                alerts, flags.size() - alerts);
    std::printf("wrote      %s\n", out.c_str());
    return 0;
}

int cmd_render(const std::string& table_path, const std::string& metric,
               const std::string& direction_s, const std::string& out_matrix,
               const std::string& out_pgm) {
    const auto direction = parse_direction(direction_s);
    if (!direction) {
        throw InputError("BadDirection: '" + direction_s + "' is not EB or WB");
    }
    const ValueTable table = read_table(table_path);
    const HeatmapGrid grid = build_grid(table, metric, *direction);
    write_matrix_csv(out_matrix, grid);
    write_pgm(out_pgm, grid);
    std::printf("grid       %s %s: %d segments x %d intervals, %zu populated\n",
                metric.c_str(), to_string(*direction).data(), grid.n_segments,
                grid.n_intervals, grid.present_cells);
    std::printf("scaling    min %s -> 0, max %s -> 255\n",
                util::format_double(grid.min_value).c_str(),
                util::format_double(grid.max_value).c_str());
    std::printf("wrote      %s, %s\n", out_matrix.c_str(), out_pgm.c_str());
    return 0;
}

int cmd_synth(const CommonArgs& common, const std::string& scenario_path,
              const std::string& out_waypoints, const std::string& out_route,
              const std::optional<std::string>& out_truth) {
    const ScenarioSpec spec = load_scenario(scenario_path);
    const auto corridor = build_synth_corridor(spec);
    const auto journeys = simulate(spec, corridor);
    write_waypoints_csv(out_waypoints, journeys, corridor);
    write_route_csv(out_route, corridor);

    std::size_t pings = 0;
    for (const auto& j : journeys) pings += j.pings.size();
    std::printf("synth      %zu journeys, %zu waypoints\n", journeys.size(),
                pings);
    std::printf("wrote      %s, %s\n", out_waypoints.c_str(), out_route.c_str());

    if (out_truth) {
        const RunConfig cfg = config_for(common);
        const OracleResult oracle = oracle_metrics(spec, cfg);
        TableMeta meta;
        meta["segment_length_miles"] =
            util::format_double(cfg.segment_length_miles);
        meta["interval_minutes"] = util::format_double(cfg.interval_minutes);
        meta["epoch_start_ms"] = std::to_string(oracle.epoch_start_ms);
        for (const auto& [dir, len] : oracle.route_length_mi) {
            meta[dir == Direction::EB ? "route_length_miles_eb"
                                      : "route_length_miles_wb"] =
                util::format_double(len);
        }
        write_table(*out_truth, metrics_to_table(oracle.cells, meta));
        std::printf("truth      %zu cells\n", oracle.cells.size());
        std::printf("wrote      %s\n", out_truth->c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tprof: corridor trajectory profiling"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path,
                        "flat key = value config file");
        sub->add_option("--threads", common.threads, "worker thread cap")
            ->check(CLI::Range(1, 256));
    };

    // profile
    std::string waypoints, route, out;
    CLI::App* profile = app.add_subcommand(
        "profile", "waypoints + route -> per-cell metrics table");
    profile->add_option("--waypoints", waypoints, "waypoint CSV")->required();
    profile->add_option("--route", route, "route vertex CSV")->required();
    profile->add_option("--out", out, "output metrics CSV")->required();
    add_common(profile);

    // indices
    std::string metrics_path;
    CLI::App* indices = app.add_subcommand(
        "indices", "metrics table -> indexed table (safety/comfort/stability)");
    indices->add_option("--metrics", metrics_path, "metrics CSV")->required();
    indices->add_option("--out", out, "output indexed CSV")->required();
    add_common(indices);

    // baseline build / detect
    CLI::App* baseline =
        app.add_subcommand("baseline", "historical baselines and anomaly flags");
    baseline->require_subcommand(1);
    std::vector<std::string> daily_paths;
    CLI::App* bl_build =
        baseline->add_subcommand("build", "daily tables -> baseline profile");
    bl_build->add_option("--daily", daily_paths, "daily metrics CSVs")
        ->required()
        ->expected(-1);
    bl_build->add_option("--out", out, "output baseline CSV")->required();
    add_common(bl_build);

    std::string baseline_path;
    CLI::App* bl_detect = baseline->add_subcommand(
        "detect", "current table + baseline -> anomaly report");
    bl_detect->add_option("--metrics", metrics_path, "current metrics CSV")
        ->required();
    bl_detect->add_option("--baseline", baseline_path, "baseline CSV")
        ->required();
    bl_detect->add_option("--out", out, "output anomaly CSV")->required();
    add_common(bl_detect);

    // render
    std::string table_path, metric, direction_s, out_matrix, out_pgm;
    CLI::App* render = app.add_subcommand(
        "render", "one metric as a segments x intervals heatmap");
    render->add_option("--table", table_path, "metrics or indexed CSV")
        ->required();
    render->add_option("--metric", metric, "column to render")->required();
    render->add_option("--direction", direction_s, "EB or WB")->required();
    render->add_option("--out-matrix", out_matrix, "output matrix CSV")
        ->required();
    render->add_option("--out-pgm", out_pgm, "output PGM image")->required();

    // synth
    std::string scenario_path, out_waypoints, out_route;
    std::string out_truth;
    CLI::App* synth = app.add_subcommand(
        "synth", "scenario spec -> synthetic waypoints (+ ground truth)");
    synth->add_option("--scenario", scenario_path, "scenario spec file")
        ->required();
    synth->add_option("--out-waypoints", out_waypoints, "output waypoint CSV")
        ->required();
    synth->add_option("--out-route", out_route, "output route CSV")->required();
    synth->add_option("--out-truth", out_truth,
                      "output expected-metrics CSV (deterministic specs only)");
    add_common(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) common.config_path = config_path;
        if (profile->parsed()) {
            return cmd_profile(common, waypoints, route, out);
        }
        if (indices->parsed()) {
            return cmd_indices(common, metrics_path, out);
        }
        if (bl_build->parsed()) {
            return cmd_baseline_build(common, daily_paths, out);
        }
        if (bl_detect->parsed()) {
            return cmd_baseline_detect(common, metrics_path, baseline_path, out);
        }
        if (render->parsed()) {
            return cmd_render(table_path, metric, direction_s, out_matrix,
                              out_pgm);
        }
        if (synth->parsed()) {
            return cmd_synth(common, scenario_path, out_waypoints, out_route,
                             out_truth.empty()
                                 ? std::nullopt
                                 : std::optional<std::string>(out_truth));
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
