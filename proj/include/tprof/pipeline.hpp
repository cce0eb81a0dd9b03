#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tprof/aggregate.hpp"
#include "tprof/config.hpp"
#include "tprof/ingest.hpp"
#include "tprof/route.hpp"
#include "tprof/table.hpp"

namespace tprof {

// Run accounting for the profile summary: every input line ends up in
// exactly one of records/rejects, and every matched sample in exactly one of
// cells/pre-epoch.
struct ProfileStats {
    std::uint64_t data_lines = 0;
    std::uint64_t records = 0;
    std::uint64_t rejected_lines = 0;
    std::uint64_t off_route = 0;
    std::uint64_t pre_epoch = 0;
    std::uint64_t journeys = 0;      // after gap splitting
    std::uint64_t split_parts = 0;   // journeys carrying a ~k split suffix
    std::uint64_t matched_samples = 0;
    std::uint64_t cells = 0;
    std::int64_t epoch_start_ms = 0;
};

struct ProfileResult {
    std::vector<CellMetrics> cells;  // canonical order
    ProfileStats stats;
    TableMeta meta;  // grid parameters + per-direction route lengths
};

// The full batch pipeline: parse -> assemble -> match -> kinematics -> fuel
// -> aggregate -> finalize. Matching and kinematics are embarrassingly
// parallel per journey and always bit-identical regardless of thread count;
// aggregation order follows cfg.deterministic_mode.
ProfileResult run_profile(const std::string& waypoints_path,
                          const std::string& route_path, const RunConfig& cfg,
                          int threads);

// In-memory variant used by tests and the synth round trip.
ProfileResult run_profile_records(std::vector<WaypointRecord> records,
                                  std::size_t data_lines,
                                  std::size_t rejected_lines,
                                  const std::map<Direction, RoutePolyline>& lines,
                                  const RunConfig& cfg, int threads);

}  // namespace tprof
