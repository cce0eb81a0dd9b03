#pragma once

#include <cmath>

namespace tprof::geo {

inline constexpr double kEarthRadiusM = 6371008.8;  // mean Earth radius
inline constexpr double kMetersPerMile = 1609.344;
inline constexpr double kMphToMps = 0.44704;
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

struct LatLon {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

inline bool valid_coordinate(const LatLon& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) &&
           p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

// Great-circle distance on the mean-radius sphere, in meters.
double haversine_m(const LatLon& a, const LatLon& b);

// Absolute heading difference folded into [0, 180]. Accepts any real input,
// including headings shifted by multiples of 360.
double heading_delta_deg(double h1_deg, double h2_deg);

// Folds a bearing into [0, 360).
double wrap_bearing_deg(double deg);

}  // namespace tprof::geo
