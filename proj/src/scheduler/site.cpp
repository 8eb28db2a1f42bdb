#include "wmsmon/scheduler/site.hpp"

namespace wmsmon {

std::string_view to_string(SiteRole r) {
  switch (r) {
    case SiteRole::Routine: return "routine";
    case SiteRole::Intensive: return "intensive";
    case SiteRole::Alternate: return "alternate";
  }
  return "unknown";
}

std::optional<SiteRole> site_role_from_string(std::string_view s) {
  for (auto r : {SiteRole::Routine, SiteRole::Intensive, SiteRole::Alternate}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

bool MonitoringSite::valid() const {
  return !site_id.empty() && location.lat >= -90 && location.lat <= 90 && location.lon >= -180 &&
         location.lon <= 180 && (role != SiteRole::Alternate || alternate_for.has_value());
}

void to_json(nlohmann::json& j, const MonitoringSite& s) {
  j = {{"site_id", s.site_id},
       {"label", s.label},
       {"location",
        {{"lat", s.location.lat},
         {"lon", s.location.lon},
         {"city", s.location.city},
         {"country", s.location.country},
         {"continent", s.location.continent}}},
       {"role", to_string(s.role)},
       {"active", s.active},
       {"alternate_for", s.alternate_for ? nlohmann::json(*s.alternate_for) : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, MonitoringSite& s) {
  s.site_id = j.at("site_id").get<std::string>();
  s.label = j.value("label", std::string{});
  if (j.contains("location")) {
    const auto& l = j.at("location");
    s.location.lat = l.at("lat").get<double>();
    s.location.lon = l.at("lon").get<double>();
    s.location.city = l.value("city", std::string{});
    s.location.country = l.value("country", std::string{});
    s.location.continent = l.value("continent", std::string{});
  }
  const auto role = site_role_from_string(j.value("role", std::string{"intensive"}));
  if (!role) throw nlohmann::json::other_error::create(501, "unknown site role", &j);
  s.role = *role;
  s.active = j.value("active", true);
  s.alternate_for.reset();
  if (j.contains("alternate_for") && j["alternate_for"].is_string()) s.alternate_for = j["alternate_for"].get<std::string>();
}

}  // namespace wmsmon
