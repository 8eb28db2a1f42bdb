#include "wmsmon/net/rate_limiter.hpp"

#include <algorithm>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

HostRateLimiter::HostRateLimiter(Clock& clock, Millis min_interval)
    : clock_(clock), min_interval_(min_interval) {}

Timestamp HostRateLimiter::reserve(const std::string& host, Timestamp earliest) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = next_free_.try_emplace(host, earliest);
  const Timestamp slot = inserted ? earliest : std::max(earliest, it->second);
  it->second = slot + min_interval_;
  return slot;
}

Timestamp HostRateLimiter::acquire(const std::string& host) {
  const Timestamp slot = reserve(host, clock_.now());
  clock_.sleep_until(slot);
  return slot;
}


HttpResponse RateLimitedTransport::fetch(const HttpRequest& request) {
  limiter_.acquire(url_host(request.url));
  return inner_.fetch(request);
}

}  // namespace wmsmon
