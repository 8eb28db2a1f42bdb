#pragma once

#include <string_view>

#include "wmsmon/model/types.hpp"

namespace wmsmon {

/// Software evidenced by the endpoint URL alone.
PublisherSoftware publisher_from_url(std::string_view url);

/// URL evidence first; the document's own markers only when the URL says
/// nothing.
PublisherSoftware detect_publisher_software(std::string_view url, const CapabilitiesDoc& doc);

}  // namespace wmsmon
