#include "tprof/geo.hpp"

#include <algorithm>

namespace tprof::geo {

double haversine_m(const LatLon& a, const LatLon& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double heading_delta_deg(double h1_deg, double h2_deg) {
    double d = std::fabs(std::fmod(h2_deg - h1_deg, 360.0));
    return std::min(d, 360.0 - d);
}

double wrap_bearing_deg(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

}  // namespace tprof::geo
