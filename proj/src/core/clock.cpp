#include "wmsmon/core/clock.hpp"

#include <thread>

namespace wmsmon {

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(Timestamp t) {
  std::this_thread::sleep_until(t);
}

Timestamp ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_until(Timestamp t) {
  std::lock_guard lock(mu_);
  if (t > now_) now_ = t;
}

void ManualClock::advance(Millis d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

void ManualClock::set(Timestamp t) {
  std::lock_guard lock(mu_);
  now_ = t;
}

ScaledClock::ScaledClock(Timestamp origin, double factor)
    : origin_(origin), real_start_(std::chrono::steady_clock::now()), factor_(factor) {}

Timestamp ScaledClock::now() const {
  const auto real = std::chrono::steady_clock::now() - real_start_;
  const auto virt = std::chrono::duration<double, std::milli>(real) * factor_;
  return origin_ + std::chrono::duration_cast<Millis>(virt);
}

void ScaledClock::sleep_until(Timestamp t) {
  const auto remaining = t - now();
  if (remaining <= Millis{0}) return;
  std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(remaining) / factor_);
}

}  // namespace wmsmon
