#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/net/rate_limiter.hpp"
#include "wmsmon/scheduler/engine.hpp"
#include "wmsmon/scheduler/plan.hpp"
#include "wmsmon/scheduler/site.hpp"

namespace wmsmon {

/// Operator switches observed by a running campaign. Thread-safe.
class CampaignControl {
 public:
  void pause() { paused_ = true; }
  void resume() { paused_ = false; }
  bool paused() const { return paused_; }
  /// Blocks until probes that passed the pause check before the last
  /// pause() have returned. After pause() then quiesce(), no probe starts
  /// until resume().
  void quiesce() { std::unique_lock lock(gate_); }
  /// Held shared by the runner from its pause check through the probe.
  std::shared_mutex& gate() { return gate_; }
  void stop() { stopped_ = true; }
  bool stopped() const { return stopped_; }

  void set_site_active(const std::string& site_id, bool active);
  /// Overrides set through set_site_active, else the site's own flag.
  bool site_active(const MonitoringSite& site) const;

 private:
  std::atomic<bool> paused_{false};
  std::atomic<bool> stopped_{false};
  std::shared_mutex gate_;
  mutable std::mutex mu_;
  std::map<std::string, bool> site_overrides_;
};

struct RunOptions {
  std::size_t workers_per_site = 2;  // 0 runs probes on the coordinator thread
  HostRateLimiter* limiter = nullptr;
  CampaignControl* control = nullptr;
  int alternate_after_misses = 3;
  Millis poll_interval{1000};  // how often a waiting coordinator checks for stop
};

/// Upper edges (ms) of the lateness histogram buckets; a final bucket
/// collects everything above the last edge.
inline constexpr std::int64_t kLatenessEdgesMs[] = {100, 1000, 5000, 10000};

struct RunReport {
  std::size_t due = 0;
  std::size_t fired = 0;
  std::size_t missed = 0;
  std::size_t late = 0;
  Millis max_lateness{0};
  std::vector<std::size_t> lateness_histogram = std::vector<std::size_t>(std::size(kLatenessEdgesMs) + 1);
  std::map<std::string, std::size_t> missed_by_reason;
  std::map<std::string, std::size_t> fired_by_site;
  std::vector<std::pair<std::string, std::string>> failovers;  // (primary, alternate)
  std::size_t sink_errors = 0;
};

void to_json(nlohmann::json& j, const RunReport& r);

/// Counts so far, delivered from the coordinator after every tick.
using ProgressCallback = std::function<void(const RunReport&)>;

/// Drives a plan until its end (or until stopped). Fires to inactive sites,
/// fires that find the campaign paused, and fires the engine cannot execute
/// are counted as missed, so fired + missed == due always holds.
///
/// A site with role alternate and alternate_for = P takes over P's fires
/// after P misses `alternate_after_misses` consecutive fires, and hands them
/// back once P is active again.
RunReport run_campaign(const CampaignPlan& plan, const std::vector<ServiceRecord>& services,
                       const std::vector<MonitoringSite>& sites, ProbeEngine& engine, ProbeSink& sink,
                       Clock& clock, const RunOptions& options = {}, const ProgressCallback& progress = {});

}  // namespace wmsmon
