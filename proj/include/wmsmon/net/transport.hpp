#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "wmsmon/core/time.hpp"

namespace wmsmon {

/// Phase durations of one HTTP exchange, in whole milliseconds.
///
/// request_processing covers the span from connection established (TLS
/// included) to the first response byte. The phases are cut from cumulative
/// time points, so they always add up to total_ms.
struct TimingBreakdown {
  std::int64_t dns_ms = 0;
  std::int64_t connect_ms = 0;
  std::int64_t request_processing_ms = 0;
  std::int64_t transfer_ms = 0;
  std::int64_t total_ms = 0;

  std::int64_t phase_sum() const { return dns_ms + connect_ms + request_processing_ms + transfer_ms; }
  bool consistent(std::int64_t slack_ms = 5) const;

  friend bool operator==(const TimingBreakdown&, const TimingBreakdown&) = default;
};

/// Cumulative phase marks as reported by the transport, in microseconds from
/// request start. A mark of 0 means the phase was never reached.
struct PhaseMarks {
  std::int64_t dns_done_us = 0;
  std::int64_t connect_done_us = 0;
  std::int64_t first_byte_us = 0;
  std::int64_t total_us = 0;
};

/// Builds a breakdown from cumulative marks. `clamp_total` caps the total
/// (timeouts record exactly the timeout). When no response byte arrived, the
/// waiting time after connect counts as request processing.
TimingBreakdown compose_timing(const PhaseMarks& marks, std::optional<Millis> clamp_total = {});

enum class TransportFailure { None, DnsFailure, ConnectFailure, Timeout, NetworkError };

std::string_view to_string(TransportFailure f);

struct HttpRequest {
  std::string url;
  Millis timeout{60'000};
  int max_redirects = 5;
  std::size_t max_body_bytes = 64u * 1024u * 1024u;
};

struct HttpResponse {
  TransportFailure failure = TransportFailure::None;
  std::string error_message;
  int status = 0;
  std::string content_type;
  std::string body;
  std::string effective_url;
  TimingBreakdown timing;

  bool transport_ok() const { return failure == TransportFailure::None; }
};

/// One HTTP GET per call. Implementations must be safe to call from several
/// threads at once.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse fetch(const HttpRequest& request) = 0;
};

class CurlTransport final : public HttpTransport {
 public:
  explicit CurlTransport(std::string user_agent = "wmsmon/1.0");
  HttpResponse fetch(const HttpRequest& request) override;

 private:
  std::string user_agent_;
};

}  // namespace wmsmon
