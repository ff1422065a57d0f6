#include "promind/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace promind {

bool GeoPoint::valid() const noexcept {
  return std::isfinite(latitude) && std::isfinite(longitude) && latitude >= -90.0 &&
         latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.latitude * kRad;
  const double phi2 = b.latitude * kRad;
  const double dphi = (b.latitude - a.latitude) * kRad;
  const double dlambda = (b.longitude - a.longitude) * kRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

double travel_speed_kmh(TravelMode mode) noexcept {
  return mode == TravelMode::Walk ? 5.0 : 60.0;
}

std::string_view to_string(TravelMode mode) { return mode == TravelMode::Walk ? "walk" : "car"; }

std::optional<TravelMode> parse_travel_mode(std::string_view s) {
  if (s == "walk" || s == "Walk" || s == "WALK") return TravelMode::Walk;
  if (s == "car" || s == "Car" || s == "CAR") return TravelMode::Car;
  return std::nullopt;
}

std::optional<GeoPoint> parse_geo_point(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string lat(s.substr(0, comma));
    const std::string lon(s.substr(comma + 1));
    GeoPoint p;
    p.latitude = std::stod(lat, &used);
    if (used != lat.size()) return std::nullopt;
    p.longitude = std::stod(lon, &used);
    if (used != lon.size()) return std::nullopt;
    if (!p.valid()) return std::nullopt;
    return p;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace promind
