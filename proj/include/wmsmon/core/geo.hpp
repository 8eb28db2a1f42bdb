#pragma once

namespace wmsmon {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in km on a sphere of radius kEarthRadiusKm.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

}  // namespace wmsmon
