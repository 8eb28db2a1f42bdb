#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <span>
#include <string_view>

#include "wmsmon/core/error.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

enum class ParseErrc { NotXml, NotWms, Truncated };
using ParseError = Error<ParseErrc>;

inline constexpr std::size_t kDefaultCapabilitiesCap = 32u * 1024u * 1024u;

struct ParseOptions {
  std::size_t max_bytes = kDefaultCapabilitiesCap;
};

/// Parses a GetCapabilities response of any WMS version.
///
/// Accepts documents rooted at `WMS_Capabilities` (1.3.0) or
/// `WMT_MS_Capabilities` (1.0.0 to 1.1.1), whatever namespace prefix they
/// carry. The layer tree keeps document order. Child layers inherit their
/// parent's CRS list and geographic extent as the WMS standard prescribes,
/// so every LayerRecord holds its effective values.
///
/// The XML declaration decides the character encoding. If the payload does
/// not decode under it, UTF-8 and then Latin-1 are tried before giving up.
///
/// Throws ParseError with NotXml, NotWms or Truncated.
CapabilitiesDoc parse_capabilities(std::string_view xml, const ParseOptions& options = {});

/// Local name of the document element if the payload starts as XML, without
/// requiring the rest to be well-formed.
std::optional<std::string> xml_root_element(std::string_view xml);

enum class LayerErrc { NoNamedLayer };
using LayerError = Error<LayerErrc>;

/// First layer in pre-order traversal with a non-empty name. Cascading
/// parents qualify.
const LayerRecord& first_named_layer(const CapabilitiesDoc& doc);

/// Pre-order walk over every layer of the document.
void for_each_layer(const CapabilitiesDoc& doc,
                    const std::function<void(const LayerRecord&, std::size_t depth)>& fn);

std::size_t count_named_layers(const CapabilitiesDoc& doc);
std::size_t count_layers(const CapabilitiesDoc& doc);

}  // namespace wmsmon
