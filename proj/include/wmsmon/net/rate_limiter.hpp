#pragma once

#include <map>
#include <mutex>
#include <string>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/net/transport.hpp"

namespace wmsmon {

/// Per-host admission control: at most one request per `min_interval` per
/// host. Shared by the crawler and all monitoring sites of a process.
class HostRateLimiter {
 public:
  HostRateLimiter(Clock& clock, Millis min_interval);

  /// Books the earliest slot at or after `earliest` and returns it without
  /// waiting.
  Timestamp reserve(const std::string& host, Timestamp earliest);

  /// Books a slot from now and sleeps until it.
  Timestamp acquire(const std::string& host);

  Millis min_interval() const { return min_interval_; }
  Clock& clock() { return clock_; }

 private:
  Clock& clock_;
  Millis min_interval_;
  std::mutex mu_;
  std::map<std::string, Timestamp> next_free_;
};


/// Transport decorator that admits each request through a HostRateLimiter.
class RateLimitedTransport final : public HttpTransport {
 public:
  RateLimitedTransport(HttpTransport& inner, HostRateLimiter& limiter)
      : inner_(inner), limiter_(limiter) {}

  HttpResponse fetch(const HttpRequest& request) override;

 private:
  HttpTransport& inner_;
  HostRateLimiter& limiter_;
};

}  // namespace wmsmon
