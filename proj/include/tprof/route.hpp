#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tprof/geo.hpp"
#include "tprof/kernels.hpp"

namespace tprof {

enum class Direction : std::uint8_t { EB = 0, WB = 1 };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

// A directed corridor as an ordered vertex list with cumulative mileposts.
// Mileposts are great-circle distances from the route start, in miles.
struct RoutePolyline {
    Direction direction = Direction::EB;
    std::vector<geo::LatLon> vertices;
    std::vector<double> mileposts;

    double length_mi() const { return mileposts.back(); }
};

// Throws InputError (TooFewVertices, InvalidCoordinate).
RoutePolyline build_polyline(std::vector<geo::LatLon> vertices, Direction dir);

// Position on the polyline at a given milepost; linear interpolation in
// lat/lon within the containing edge. Milepost must be in [0, length].
geo::LatLon position_at(const RoutePolyline& line, double milepost_mi);

// Fixed-length discretization of a corridor.
struct SegmentGrid {
    double segment_length_mi = 0.5;
    double route_length_mi = 0.0;
    int segment_count = 0;

    SegmentGrid() = default;
    SegmentGrid(double segment_length, double route_length);
};

// floor(milepost / segment_length), with milepost == route_length mapping to
// the last segment. Throws InputError for mileposts outside [0, length].
int segment_of(double milepost_mi, const SegmentGrid& grid);

struct MatchResult {
    int segment = 0;
    double milepost_mi = 0.0;
    double lateral_offset_m = 0.0;
    Direction direction = Direction::EB;
};

// Nearest-point queries against one polyline. Long edges are densified to
// <= 1 km during construction so the per-edge planar approximation stays
// accurate; results are exact-nearest for points within the prune margin.
class RouteProjector {
public:
    struct Projection {
        double milepost_mi = 0.0;
        double offset_m = 0.0;
        double bearing_deg = 0.0;  // route bearing at the matched point
    };

    explicit RouteProjector(const RoutePolyline& line,
                            double max_edge_len_m = 1000.0,
                            double prune_margin_m = 2000.0);

    // Nearest point on the polyline. Points farther than the prune margin
    // come back with offset_m = +infinity.
    Projection project(const geo::LatLon& p) const;

    // OffRoute (nullopt) when the lateral offset exceeds max_offset_m.
    std::optional<Projection> project_within(const geo::LatLon& p,
                                             double max_offset_m) const;

    const kernels::EdgeTable& edges() const { return edges_; }

private:
    kernels::EdgeTable edges_;
};

// Both directions of a corridor plus the matching rule: a waypoint goes to
// the direction with the smaller lateral offset; near-ties are resolved by
// agreement between the reported heading and the route bearing.
class CorridorModel {
public:
    CorridorModel(std::map<Direction, RoutePolyline> lines,
                  double segment_length_mi);

    std::optional<MatchResult> match(const geo::LatLon& p, double heading_deg,
                                     double max_offset_m) const;

    bool has(Direction d) const { return lines_.count(d) != 0; }
    const RoutePolyline& line(Direction d) const { return lines_.at(d); }
    const SegmentGrid& grid(Direction d) const { return grids_.at(d); }
    const std::map<Direction, RoutePolyline>& lines() const { return lines_; }

private:
    std::map<Direction, RoutePolyline> lines_;
    std::map<Direction, RouteProjector> projectors_;
    std::map<Direction, SegmentGrid> grids_;
};

// Route geometry file: one `direction,lat,lon` vertex per line, in file
// order; `#` starts a comment. Throws InputError with the offending line.
std::map<Direction, RoutePolyline> load_route_file(const std::string& path);

}  // namespace tprof
