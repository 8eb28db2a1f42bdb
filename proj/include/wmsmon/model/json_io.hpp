#pragma once

// Canonical JSON shape for the domain types. Field names follow the domain
// model; enums serialize as their kebab-case names; timestamps as ISO-8601
// UTC strings.

#include <json.hpp>

#include "wmsmon/model/types.hpp"

namespace wmsmon {

void to_json(nlohmann::json& j, const GeoLocation& v);
void from_json(const nlohmann::json& j, GeoLocation& v);
void to_json(nlohmann::json& j, const ServiceRecord& v);
void from_json(const nlohmann::json& j, ServiceRecord& v);
void to_json(nlohmann::json& j, const GeoBBox& v);
void from_json(const nlohmann::json& j, GeoBBox& v);
void to_json(nlohmann::json& j, const CrsBBox& v);
void from_json(const nlohmann::json& j, CrsBBox& v);
void to_json(nlohmann::json& j, const LayerRecord& v);
void from_json(const nlohmann::json& j, LayerRecord& v);
void to_json(nlohmann::json& j, const CapabilitiesDoc& v);
void from_json(const nlohmann::json& j, CapabilitiesDoc& v);
void to_json(nlohmann::json& j, const TimeExtent& v);

nlohmann::json timestamp_json(Timestamp t);
Timestamp timestamp_from_json(const nlohmann::json& j);

}  // namespace wmsmon
