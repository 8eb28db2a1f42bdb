#pragma once

#include <optional>
#include <string>

#include "wmsmon/crawler/candidates.hpp"
#include "wmsmon/model/capabilities.hpp"
#include "wmsmon/net/transport.hpp"

namespace wmsmon {

enum class Verdict { ValidWms, NotWms, Unreachable };

std::string_view to_string(Verdict v);

struct ValidationResult {
  CandidateUrl candidate;
  std::string request_url;  // the GetCapabilities URL actually fetched
  Verdict verdict = Verdict::Unreachable;
  int http_status = 0;
  std::string root_element;
  Millis elapsed{0};
  std::optional<CapabilitiesDoc> document;  // set iff ValidWms
};

struct ValidationOptions {
  Millis timeout{60'000};
  ParseOptions parse;
};

/// Issues GetCapabilities for the candidate. The verdict depends only on the
/// body parsing as a capabilities document; the HTTP status is recorded but
/// not consulted.
ValidationResult validate_wms_url(const CandidateUrl& candidate, HttpTransport& transport,
                                  const ValidationOptions& options = {});

}  // namespace wmsmon
