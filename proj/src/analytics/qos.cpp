#include "wmsmon/analytics/qos.hpp"

#include <algorithm>

namespace wmsmon {

std::string_view to_string(AccessibilityClass c) {
  switch (c) {
    case AccessibilityClass::AlwaysAccessible: return "always-accessible";
    case AccessibilityClass::TemporallyInaccessible: return "temporally-inaccessible";
    case AccessibilityClass::ConstantlyInaccessible: return "constantly-inaccessible";
  }
  return "constantly-inaccessible";
}

void QosAccumulator::add(const ProbeRecord& r) {
  ++n_;
  if (r.accessible) ++accessible_;
  if (r.success) {
    ++success_;
    if (r.timing) {
      const auto t = static_cast<double>(r.timing->total_ms);
      rt_min_ = rt_n_ == 0 ? t : std::min(rt_min_, t);
      rt_max_ = rt_n_ == 0 ? t : std::max(rt_max_, t);
      rt_sum_ += t;
      ++rt_n_;
    }
  } else if (r.error_class == ErrorClass::ServerAccessError) {
    ++access_errors_;
  } else {
    ++processing_errors_;
  }
}

double QosAccumulator::successability() const {
  if (n_ == 0) throw AnalyticsError(AnalyticsErrc::EmptyWindow, "no probe records in window");
  return static_cast<double>(success_) / static_cast<double>(n_);
}

AccessibilityClass QosAccumulator::accessibility() const {
  if (n_ == 0) throw AnalyticsError(AnalyticsErrc::EmptyWindow, "no probe records in window");
  if (accessible_ == n_) return AccessibilityClass::AlwaysAccessible;
  if (accessible_ == 0) return AccessibilityClass::ConstantlyInaccessible;
  return AccessibilityClass::TemporallyInaccessible;
}

ErrorShares QosAccumulator::error_shares() const {
  const auto failed = access_errors_ + processing_errors_;
  if (failed == 0) throw AnalyticsError(AnalyticsErrc::NoFailures, "no failed probes");
  return {failed, static_cast<double>(access_errors_) / static_cast<double>(failed),
          static_cast<double>(processing_errors_) / static_cast<double>(failed)};
}

std::optional<double> QosAccumulator::rt_min_ms() const {
  return rt_n_ ? std::optional(rt_min_) : std::nullopt;
}
std::optional<double> QosAccumulator::rt_avg_ms() const {
  return rt_n_ ? std::optional(rt_sum_ / static_cast<double>(rt_n_)) : std::nullopt;
}
std::optional<double> QosAccumulator::rt_max_ms() const {
  return rt_n_ ? std::optional(rt_max_) : std::nullopt;
}

namespace {
QosAccumulator accumulate(std::span<const ProbeRecord> records) {
  QosAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc;
}
}  // namespace

double successability(std::span<const ProbeRecord> records) { return accumulate(records).successability(); }

AccessibilityClass classify_accessibility(std::span<const ProbeRecord> records) {
  return accumulate(records).accessibility();
}

ErrorShares error_shares(std::span<const ProbeRecord> records) { return accumulate(records).error_shares(); }

QoSSummary summarize_qos(std::string service_id, Operation op, Timestamp from, Timestamp to,
                         std::span<const ProbeRecord> records) {
  const auto acc = accumulate(records);
  QoSSummary s;
  s.service_id = std::move(service_id);
  s.operation = op;
  s.from = from;
  s.to = to;
  s.successability = acc.successability();
  s.accessibility_class = acc.accessibility();
  s.n_probes = acc.n_probes();
  s.n_accessible = acc.n_accessible();
  s.n_success = acc.n_success();
  s.rt_min_ms = acc.rt_min_ms();
  s.rt_avg_ms = acc.rt_avg_ms();
  s.rt_max_ms = acc.rt_max_ms();
  return s;
}

void to_json(nlohmann::json& j, const QoSSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = {{"service_id", s.service_id},
       {"operation", to_string(s.operation)},
       {"from", format_iso8601(s.from)},
       {"to", format_iso8601(s.to)},
       {"n_probes", s.n_probes},
       {"n_accessible", s.n_accessible},
       {"n_success", s.n_success},
       {"successability", s.successability},
       {"accessibility_class", to_string(s.accessibility_class)},
       {"rt_min_ms", opt(s.rt_min_ms)},
       {"rt_avg_ms", opt(s.rt_avg_ms)},
       {"rt_max_ms", opt(s.rt_max_ms)}};
}

}  // namespace wmsmon
