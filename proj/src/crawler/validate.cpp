#include "wmsmon/crawler/validate.hpp"

#include "wmsmon/core/url.hpp"

namespace wmsmon {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ValidWms: return "valid-wms";
    case Verdict::NotWms: return "not-wms";
    case Verdict::Unreachable: return "unreachable";
  }
  return "unknown";
}

ValidationResult validate_wms_url(const CandidateUrl& candidate, HttpTransport& transport,
                                  const ValidationOptions& options) {
  ValidationResult result;
  result.candidate = candidate;
  try {
    result.request_url = form_getcapabilities_url(candidate.url);
  } catch (const UrlError&) {
    result.verdict = Verdict::NotWms;
    return result;
  }
  HttpRequest request{result.request_url};
  request.timeout = options.timeout;
  const auto response = transport.fetch(request);
  result.elapsed = Millis{response.timing.total_ms};
  result.http_status = response.status;
  if (!response.transport_ok()) {
    result.verdict = Verdict::Unreachable;
    return result;
  }
  try {
    result.document = parse_capabilities(response.body, options.parse);
    result.root_element = result.document->root_element;
    result.verdict = Verdict::ValidWms;
  } catch (const ParseError&) {
    result.root_element = xml_root_element(response.body).value_or("");
    result.verdict = Verdict::NotWms;
  }
  return result;
}

}  // namespace wmsmon
