#pragma once

#include <optional>
#include <string_view>

namespace promind {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
  bool valid() const noexcept;
};

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

enum class TravelMode { Walk, Car };

/// km/h: walking 5, driving 60.
double travel_speed_kmh(TravelMode mode) noexcept;

std::string_view to_string(TravelMode mode);
std::optional<TravelMode> parse_travel_mode(std::string_view s);

/// Parses "lat,lon".
std::optional<GeoPoint> parse_geo_point(std::string_view s);

}  // namespace promind
