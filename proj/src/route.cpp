#include "tprof/route.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "tprof/errors.hpp"
#include "tprof/util.hpp"

namespace tprof {

using geo::LatLon;

std::string_view to_string(Direction d) {
    return d == Direction::EB ? "EB" : "WB";
}

std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "EB") return Direction::EB;
    if (s == "WB") return Direction::WB;
    return std::nullopt;
}

RoutePolyline build_polyline(std::vector<LatLon> vertices, Direction dir) {
    if (vertices.size() < 2) {
        throw InputError("TooFewVertices: a route polyline needs at least 2 "
                         "vertices, got " + std::to_string(vertices.size()));
    }
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (!geo::valid_coordinate(vertices[i])) {
            throw InputError("InvalidCoordinate: vertex " + std::to_string(i) +
                             " out of lat/lon range");
        }
    }
    RoutePolyline line;
    line.direction = dir;
    line.vertices = std::move(vertices);
    line.mileposts.resize(line.vertices.size());
    line.mileposts[0] = 0.0;
    for (std::size_t i = 1; i < line.vertices.size(); ++i) {
        const double d_m = geo::haversine_m(line.vertices[i - 1], line.vertices[i]);
        line.mileposts[i] = line.mileposts[i - 1] + d_m / geo::kMetersPerMile;
    }
    return line;
}

geo::LatLon position_at(const RoutePolyline& line, double milepost_mi) {
    if (milepost_mi < 0.0 || milepost_mi > line.length_mi()) {
        throw InvariantError("position_at: milepost outside route");
    }
    const auto& mp = line.mileposts;
    auto it = std::upper_bound(mp.begin(), mp.end(), milepost_mi);
    std::size_t hi = std::min<std::size_t>(it - mp.begin(), mp.size() - 1);
    std::size_t lo = hi - 1;
    const double span = mp[hi] - mp[lo];
    const double t = span > 0.0 ? (milepost_mi - mp[lo]) / span : 0.0;
    const LatLon& a = line.vertices[lo];
    const LatLon& b = line.vertices[hi];
    return {a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)};
}

SegmentGrid::SegmentGrid(double segment_length, double route_length)
    : segment_length_mi(segment_length), route_length_mi(route_length) {
    if (!(segment_length > 0.0)) {
        throw InputError("SegmentGrid: segment_length must be > 0");
    }
    if (!(route_length > 0.0)) {
        throw InputError("SegmentGrid: route_length must be > 0");
    }
    // Tolerate ratios that land a hair above an integer from fp division.
    segment_count = std::max(
        1, static_cast<int>(std::ceil(route_length / segment_length - 1e-9)));
}

int segment_of(double milepost_mi, const SegmentGrid& grid) {
    if (milepost_mi < 0.0 || milepost_mi > grid.route_length_mi) {
        throw InputError("OutOfRange: milepost " + std::to_string(milepost_mi) +
                         " outside [0, " + std::to_string(grid.route_length_mi) +
                         "]");
    }
    int s = static_cast<int>(milepost_mi / grid.segment_length_mi);
    return std::min(s, grid.segment_count - 1);
}

namespace {

// Densified SoA edge table with per-block prune boxes.
kernels::EdgeTable build_edge_table(const RoutePolyline& line,
                                    double max_edge_len_m,
                                    double prune_margin_m) {
    kernels::EdgeTable tab;
    const double R = geo::kEarthRadiusM;

    auto push_edge = [&](const LatLon& a, const LatLon& b, double mp_a,
                         double mp_b) {
        const double lat0 = a.lat * geo::kDegToRad;
        const double lon0 = a.lon * geo::kDegToRad;
        const double ref_lat = 0.5 * (a.lat + b.lat) * geo::kDegToRad;
        const double kx = std::cos(ref_lat) * R;
        const double ex = (b.lon - a.lon) * geo::kDegToRad * kx;
        const double ey = (b.lat - a.lat) * geo::kDegToRad * R;
        const double len2 = ex * ex + ey * ey;
        tab.lat0.push_back(lat0);
        tab.lon0.push_back(lon0);
        tab.kx.push_back(kx);
        tab.ex.push_back(ex);
        tab.ey.push_back(ey);
        tab.inv_len2.push_back(len2 > 0.0 ? 1.0 / len2 : 0.0);
        tab.mp0.push_back(mp_a);
        tab.mp_len.push_back(mp_b - mp_a);
        tab.bearing.push_back(
            geo::wrap_bearing_deg(std::atan2(ex, ey) * geo::kRadToDeg));
    };

    for (std::size_t i = 0; i + 1 < line.vertices.size(); ++i) {
        const LatLon& a = line.vertices[i];
        const LatLon& b = line.vertices[i + 1];
        const double mp_a = line.mileposts[i];
        const double mp_b = line.mileposts[i + 1];
        const double len_m = (mp_b - mp_a) * geo::kMetersPerMile;
        const int pieces =
            std::max(1, static_cast<int>(std::ceil(len_m / max_edge_len_m)));
        for (int k = 0; k < pieces; ++k) {
            const double t0 = static_cast<double>(k) / pieces;
            const double t1 = static_cast<double>(k + 1) / pieces;
            const LatLon p0{a.lat + t0 * (b.lat - a.lat),
                            a.lon + t0 * (b.lon - a.lon)};
            const LatLon p1{a.lat + t1 * (b.lat - a.lat),
                            a.lon + t1 * (b.lon - a.lon)};
            push_edge(p0, p1, mp_a + t0 * (mp_b - mp_a), mp_a + t1 * (mp_b - mp_a));
        }
    }
    tab.n_edges = tab.lat0.size();

    // Pad to full 4-lane blocks with far-away degenerate edges.
    while (tab.lat0.size() % 4 != 0) {
        tab.lat0.push_back(100.0);
        tab.lon0.push_back(100.0);
        tab.kx.push_back(R);
        tab.ex.push_back(0.0);
        tab.ey.push_back(0.0);
        tab.inv_len2.push_back(0.0);
        tab.mp0.push_back(0.0);
        tab.mp_len.push_back(0.0);
        tab.bearing.push_back(0.0);
    }
    tab.n_lanes = tab.lat0.size();

    const double mlat = prune_margin_m / R;
    for (std::size_t b = 0; b < tab.n_blocks(); ++b) {
        double lat_lo = std::numeric_limits<double>::infinity();
        double lat_hi = -lat_lo, lon_lo = lat_lo, lon_hi = -lat_lo;
        double cos_min = 1.0;
        for (std::size_t lane = 0; lane < 4; ++lane) {
            const std::size_t i = b * 4 + lane;
            if (i >= tab.n_edges) continue;
            const double la0 = tab.lat0[i];
            const double la1 = la0 + tab.ey[i] / R;
            const double lo0 = tab.lon0[i];
            const double lo1 = lo0 + tab.ex[i] / tab.kx[i];
            lat_lo = std::min(lat_lo, std::min(la0, la1));
            lat_hi = std::max(lat_hi, std::max(la0, la1));
            lon_lo = std::min(lon_lo, std::min(lo0, lo1));
            lon_hi = std::max(lon_hi, std::max(lo0, lo1));
            cos_min = std::min(cos_min, std::max(0.05, std::cos(std::max(
                                            std::fabs(la0), std::fabs(la1)))));
        }
        const double mlon = prune_margin_m / (R * cos_min);
        tab.blk_lat_lo.push_back(lat_lo - mlat);
        tab.blk_lat_hi.push_back(lat_hi + mlat);
        tab.blk_lon_lo.push_back(lon_lo - mlon);
        tab.blk_lon_hi.push_back(lon_hi + mlon);
    }
    return tab;
}

}  // namespace

RouteProjector::RouteProjector(const RoutePolyline& line, double max_edge_len_m,
                               double prune_margin_m)
    : edges_(build_edge_table(line, max_edge_len_m, prune_margin_m)) {}

RouteProjector::Projection RouteProjector::project(const LatLon& p) const {
    kernels::ProjectHit hit;
    kernels::ops().project_point(edges_, p.lat * geo::kDegToRad,
                                 p.lon * geo::kDegToRad, hit);
    if (hit.edge < 0) {
        return {0.0, std::numeric_limits<double>::infinity(), 0.0};
    }
    const auto e = static_cast<std::size_t>(hit.edge);
    Projection out;
    out.milepost_mi = edges_.mp0[e] + hit.t * edges_.mp_len[e];
    out.offset_m = std::sqrt(hit.dist_sq);
    out.bearing_deg = edges_.bearing[e];
    return out;
}

std::optional<RouteProjector::Projection> RouteProjector::project_within(
    const LatLon& p, double max_offset_m) const {
    Projection proj = project(p);
    if (proj.offset_m > max_offset_m) return std::nullopt;
    return proj;
}

CorridorModel::CorridorModel(std::map<Direction, RoutePolyline> lines,
                             double segment_length_mi)
    : lines_(std::move(lines)) {
    if (lines_.empty()) {
        throw InputError("CorridorModel: route has no polylines");
    }
    for (const auto& [dir, line] : lines_) {
        projectors_.emplace(dir, RouteProjector(line));
        grids_.emplace(dir, SegmentGrid(segment_length_mi, line.length_mi()));
    }
}

std::optional<MatchResult> CorridorModel::match(const LatLon& p,
                                                double heading_deg,
                                                double max_offset_m) const {
    constexpr double kTieEpsilonM = 1e-6;

    struct Candidate {
        Direction dir;
        RouteProjector::Projection proj;
    };
    std::optional<Candidate> best;
    for (const auto& [dir, projector] : projectors_) {
        auto proj = projector.project_within(p, max_offset_m);
        if (!proj) continue;
        if (!best) {
            best = Candidate{dir, *proj};
            continue;
        }
        const double diff = proj->offset_m - best->proj.offset_m;
        if (diff < -kTieEpsilonM) {
            best = Candidate{dir, *proj};
        } else if (std::fabs(diff) <= kTieEpsilonM) {
            // Near-tie (typical for overlapping carriageways): prefer the
            // direction whose bearing agrees with the reported heading.
            const bool best_agrees =
                geo::heading_delta_deg(heading_deg, best->proj.bearing_deg) <= 90.0;
            const bool cand_agrees =
                geo::heading_delta_deg(heading_deg, proj->bearing_deg) <= 90.0;
            if (cand_agrees && !best_agrees) {
                best = Candidate{dir, *proj};
            } else if (cand_agrees == best_agrees &&
                       proj->offset_m < best->proj.offset_m) {
                best = Candidate{dir, *proj};
            }
        }
    }
    if (!best) return std::nullopt;

    MatchResult out;
    out.direction = best->dir;
    out.milepost_mi = best->proj.milepost_mi;
    out.lateral_offset_m = best->proj.offset_m;
    out.segment = segment_of(best->proj.milepost_mi, grids_.at(best->dir));
    return out;
}

std::map<Direction, RoutePolyline> load_route_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("route file not readable: " + path);
    }
    std::map<Direction, std::vector<LatLon>> verts;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view s(raw);
        if (auto pos = s.find('#'); pos != std::string_view::npos) {
            s = s.substr(0, pos);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
            s.remove_suffix(1);
        }
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        if (s.empty()) continue;
        if (s == "direction,lat,lon") continue;  // optional header

        std::vector<std::string_view> fields;
        util::split_csv(s, fields);
        if (fields.size() != 3) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": expected `direction,lat,lon`");
        }
        auto dir = parse_direction(util::trim(fields[0]));
        if (!dir) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": unknown direction `" + std::string(fields[0]) + "`");
        }
        auto lat = util::parse_double(fields[1]);
        auto lon = util::parse_double(fields[2]);
        if (!lat || !lon) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": unparsable coordinate");
        }
        verts[*dir].push_back({*lat, *lon});
    }
    if (verts.empty()) {
        throw InputError("route file has no vertices: " + path);
    }
    std::map<Direction, RoutePolyline> out;
    for (auto& [dir, v] : verts) {
        try {
            out.emplace(dir, build_polyline(std::move(v), dir));
        } catch (const InputError& e) {
            throw InputError(path + " (" + std::string(to_string(dir)) +
                             "): " + e.what());
        }
    }
    return out;
}

}  // namespace tprof
