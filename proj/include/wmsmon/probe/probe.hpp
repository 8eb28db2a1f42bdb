#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/core/error.hpp"
#include "wmsmon/model/types.hpp"
#include "wmsmon/net/rate_limiter.hpp"
#include "wmsmon/net/transport.hpp"

namespace wmsmon {

enum class Operation { GetCapabilities, GetMap };
enum class ErrorClass { ServerAccessError, RequestProcessingError };

std::string_view to_string(Operation op);
std::string_view to_string(ErrorClass e);
std::optional<Operation> operation_from_string(std::string_view s);
std::optional<ErrorClass> error_class_from_string(std::string_view s);

struct ProbeRecord {
  std::string service_id;
  std::string site_id;
  Operation operation = Operation::GetCapabilities;
  Timestamp started_at{};
  std::optional<TimingBreakdown> timing;
  std::int64_t response_bytes = 0;
  std::optional<double> download_speed_bytes_per_s;
  bool accessible = false;
  bool success = false;
  std::optional<ErrorClass> error_class;
  std::string error_detail;
  int http_status = 0;

  /// Checks the success/accessibility/error-class coupling and timing sum.
  bool consistent() const;
};

/// response_bytes per second of transfer time; nullopt when transfer_ms is 0.
std::optional<double> download_speed(std::int64_t response_bytes, const TimingBreakdown& timing);

void to_json(nlohmann::json& j, const ProbeRecord& r);
void from_json(const nlohmann::json& j, ProbeRecord& r);

/// What one HTTP exchange amounted to, before interpretation.
enum class RawOutcome { DnsFail, ConnectFail, Timeout, Non200, WrongPayload, Ok };

inline constexpr RawOutcome kAllRawOutcomes[] = {RawOutcome::DnsFail, RawOutcome::ConnectFail,
                                                 RawOutcome::Timeout, RawOutcome::Non200,
                                                 RawOutcome::WrongPayload, RawOutcome::Ok};

std::string_view to_string(RawOutcome o);

struct Classification {
  bool accessible = false;
  bool success = false;
  std::optional<ErrorClass> error_class;

  friend bool operator==(const Classification&, const Classification&) = default;
};

/// Failing to reach the server is a server access error; anything that went
/// wrong after the server answered is a request processing error.
Classification classify_outcome(RawOutcome raw, Operation op);

/// Transport failures other than DNS and timeouts (resets, TLS, protocol
/// errors) count as connection failures.
RawOutcome raw_outcome(const HttpResponse& response, Operation op);

enum class ProbeErrc { NoUsableFormat };
using ProbeError = Error<ProbeErrc>;

struct GetMapSpec {
  WmsVersion version = WmsVersion::V1_3_0;
  std::string layer_name;
  std::string crs;
  std::array<double, 4> bbox{};  // in the axis order sent on the wire
  int width = 400;
  int height = 200;
  std::string format;
};

struct GetMapOptions {
  int width = 400;
  int height = 200;
};

/// One-layer GetMap request for the document's first named layer. Throws
/// LayerError (no named layer) or ProbeError (no formats).
GetMapSpec build_getmap_spec(const CapabilitiesDoc& doc, const GetMapOptions& options = {});

/// Request URLs built on a service's canonical URL. Its own query pairs (map=
/// and the like) are kept; protocol pairs are replaced.
std::string getcapabilities_request_url(const std::string& service_url,
                                        std::optional<WmsVersion> version = std::nullopt);
std::string getmap_request_url(const std::string& service_url, const GetMapSpec& spec);

/// True when a server asked for `requested` may legally answer with
/// `declared`: the same version, a lower one, or (when the server supports
/// nothing that low) its lowest version, `server_lowest`.
bool legal_negotiation(WmsVersion requested, WmsVersion declared,
                       std::optional<WmsVersion> server_lowest = std::nullopt);

struct VersionOutcome {
  WmsVersion requested = WmsVersion::V1_3_0;
  std::optional<WmsVersion> declared;
  bool supported = false;  // declared == requested
  bool legal = false;      // declared is an allowed answer to requested
  ProbeRecord record;
};

struct ProberOptions {
  Millis timeout{60'000};
  HostRateLimiter* limiter = nullptr;  // admission control shared across probes
};

/// Issues single monitoring requests and turns them into ProbeRecords.
/// Thread-safe; started_at is kept strictly increasing per
/// (service, site, operation).
class Prober {
 public:
  Prober(HttpTransport& transport, Clock& clock, ProberOptions options = {});

  /// GetCapabilities without a version parameter. When `document` is given
  /// it receives the parsed capabilities on success.
  ProbeRecord probe_getcapabilities(const ServiceRecord& service, const std::string& site_id,
                                    std::optional<CapabilitiesDoc>* document = nullptr);
  ProbeRecord probe_getmap(const ServiceRecord& service, const GetMapSpec& spec, const std::string& site_id);

  /// One GetCapabilities per version with an explicit version parameter.
  std::vector<VersionOutcome> probe_versions(const ServiceRecord& service, const std::string& site_id);
  std::set<WmsVersion> probe_version_support(const ServiceRecord& service, const std::string& site_id);

 private:
  struct Exchange {
    ProbeRecord record;
    HttpResponse response;
  };
  Exchange exchange(const ServiceRecord& service, const std::string& site_id, Operation op,
                    const std::string& url);
  Timestamp next_start(const std::string& service_id, const std::string& site_id, Operation op);

  HttpTransport& transport_;
  Clock& clock_;
  ProberOptions options_;
  std::mutex mu_;
  std::map<std::tuple<std::string, std::string, Operation>, Timestamp> last_start_;
};

}  // namespace wmsmon
