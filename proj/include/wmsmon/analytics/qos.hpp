#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wmsmon/analytics/error.hpp"
#include "wmsmon/probe/probe.hpp"

namespace wmsmon {

enum class AccessibilityClass { AlwaysAccessible, TemporallyInaccessible, ConstantlyInaccessible };

std::string_view to_string(AccessibilityClass c);

/// n_success / n_probes. Throws EmptyWindow on no records.
double successability(std::span<const ProbeRecord> records);

/// Three-way class from the per-record accessible flag.
AccessibilityClass classify_accessibility(std::span<const ProbeRecord> records);

struct ErrorShares {
  std::size_t n_failed = 0;
  double server_access = 0.0;
  double request_processing = 0.0;
};

/// Shares over failed records only. Throws NoFailures when nothing failed.
ErrorShares error_shares(std::span<const ProbeRecord> records);

/// Single-pass accumulator behind the functions above.
class QosAccumulator {
 public:
  void add(const ProbeRecord& r);

  std::size_t n_probes() const { return n_; }
  std::size_t n_accessible() const { return accessible_; }
  std::size_t n_success() const { return success_; }
  std::size_t n_server_access_errors() const { return access_errors_; }
  std::size_t n_request_processing_errors() const { return processing_errors_; }

  double successability() const;
  AccessibilityClass accessibility() const;
  ErrorShares error_shares() const;
  /// Response-time statistics over successful probes with a timing.
  std::optional<double> rt_min_ms() const;
  std::optional<double> rt_avg_ms() const;
  std::optional<double> rt_max_ms() const;

 private:
  std::size_t n_ = 0;
  std::size_t accessible_ = 0;
  std::size_t success_ = 0;
  std::size_t access_errors_ = 0;
  std::size_t processing_errors_ = 0;
  std::size_t rt_n_ = 0;
  double rt_sum_ = 0.0;
  double rt_min_ = 0.0;
  double rt_max_ = 0.0;
};

struct QoSSummary {
  std::string service_id;
  Operation operation = Operation::GetCapabilities;
  Timestamp from{};
  Timestamp to{};
  std::size_t n_probes = 0;
  std::size_t n_accessible = 0;
  std::size_t n_success = 0;
  double successability = 0.0;
  AccessibilityClass accessibility_class = AccessibilityClass::ConstantlyInaccessible;
  std::optional<double> rt_min_ms;
  std::optional<double> rt_avg_ms;
  std::optional<double> rt_max_ms;
};

/// Summary of one (service, operation) window. Throws EmptyWindow.
QoSSummary summarize_qos(std::string service_id, Operation op, Timestamp from, Timestamp to,
                         std::span<const ProbeRecord> records);

void to_json(nlohmann::json& j, const QoSSummary& s);

}  // namespace wmsmon
