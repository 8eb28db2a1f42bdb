#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace wmsmon {

enum class SiteRole { Routine, Intensive, Alternate };

std::string_view to_string(SiteRole r);
std::optional<SiteRole> site_role_from_string(std::string_view s);

struct SiteLocation {
  double lat = 0.0;
  double lon = 0.0;
  std::string city;
  std::string country;
  std::string continent;
};

struct MonitoringSite {
  std::string site_id;
  std::string label;
  SiteLocation location;
  SiteRole role = SiteRole::Intensive;
  bool active = true;
  // For alternates: the site whose assignments this one takes over.
  std::optional<std::string> alternate_for;

  bool valid() const;
};

void to_json(nlohmann::json& j, const MonitoringSite& s);
void from_json(const nlohmann::json& j, MonitoringSite& s);

}  // namespace wmsmon
