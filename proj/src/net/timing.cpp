#include <algorithm>
#include <cstdlib>

#include "wmsmon/net/transport.hpp"

namespace wmsmon {

bool TimingBreakdown::consistent(std::int64_t slack_ms) const {
  return dns_ms >= 0 && connect_ms >= 0 && request_processing_ms >= 0 && transfer_ms >= 0 &&
         total_ms >= 0 && std::llabs(phase_sum() - total_ms) <= slack_ms;
}

TimingBreakdown compose_timing(const PhaseMarks& marks, std::optional<Millis> clamp_total) {
  auto to_ms = [](std::int64_t us) { return (std::max<std::int64_t>(us, 0) + 500) / 1000; };

  std::int64_t total = to_ms(marks.total_us);
  std::int64_t dns = to_ms(marks.dns_done_us);
  std::int64_t connect = std::max(dns, to_ms(marks.connect_done_us));
  total = std::max(total, connect);
  if (clamp_total) total = std::min<std::int64_t>(total, clamp_total->count());
  dns = std::min(dns, total);
  connect = std::min(connect, total);
  std::int64_t first_byte = marks.first_byte_us > 0 ? to_ms(marks.first_byte_us) : total;
  first_byte = std::clamp(first_byte, connect, total);

  TimingBreakdown t;
  t.dns_ms = dns;
  t.connect_ms = connect - dns;
  t.request_processing_ms = first_byte - connect;
  t.transfer_ms = total - first_byte;
  t.total_ms = total;
  return t;
}

std::string_view to_string(TransportFailure f) {
  switch (f) {
    case TransportFailure::None: return "none";
    case TransportFailure::DnsFailure: return "dns-failure";
    case TransportFailure::ConnectFailure: return "connect-failure";
    case TransportFailure::Timeout: return "timeout";
    case TransportFailure::NetworkError: return "network-error";
  }
  return "unknown";
}

}  // namespace wmsmon
