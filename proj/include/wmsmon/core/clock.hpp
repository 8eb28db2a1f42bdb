#pragma once

#include <chrono>
#include <mutex>

#include "wmsmon/core/time.hpp"

namespace wmsmon {

/// Source of UTC time for everything that schedules or stamps records.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
  virtual void sleep_until(Timestamp t) = 0;
  void sleep_for(Millis d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
  void sleep_until(Timestamp t) override;
};

/// Virtual time that only moves when someone sleeps or advances it.
/// sleep_until never blocks; it jumps the clock forward (never backward).
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_(start) {}

  Timestamp now() const override;
  void sleep_until(Timestamp t) override;
  void advance(Millis d);
  void set(Timestamp t);

 private:
  mutable std::mutex mu_;
  Timestamp now_;
};

/// Accelerated wall clock: virtual time runs `factor` times faster than real
/// time, starting at `origin`. Used for desk-scale campaign simulation.
class ScaledClock final : public Clock {
 public:
  ScaledClock(Timestamp origin, double factor);

  Timestamp now() const override;
  void sleep_until(Timestamp t) override;
  double factor() const { return factor_; }

 private:
  Timestamp origin_;
  std::chrono::steady_clock::time_point real_start_;
  double factor_;
};

}  // namespace wmsmon
