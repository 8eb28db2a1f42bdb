#include "wmsmon/scheduler/runner.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "wmsmon/core/url.hpp"
#include "wmsmon/core/worker_pool.hpp"

namespace wmsmon {

void CampaignControl::set_site_active(const std::string& site_id, bool active) {
  std::lock_guard lock(mu_);
  site_overrides_[site_id] = active;
}

bool CampaignControl::site_active(const MonitoringSite& site) const {
  std::lock_guard lock(mu_);
  if (auto it = site_overrides_.find(site.site_id); it != site_overrides_.end()) return it->second;
  return site.active;
}

void to_json(nlohmann::json& j, const RunReport& r) {
  j = {{"due", r.due},
       {"fired", r.fired},
       {"missed", r.missed},
       {"late", r.late},
       {"max_lateness_ms", r.max_lateness.count()},
       {"lateness_histogram", r.lateness_histogram},
       {"missed_by_reason", r.missed_by_reason},
       {"fired_by_site", r.fired_by_site},
       {"sink_errors", r.sink_errors}};
  auto& f = j["failovers"] = nlohmann::json::array();
  for (const auto& [primary, alternate] : r.failovers) f.push_back({{"primary", primary}, {"alternate", alternate}});
}

namespace {

class Runner {
 public:
  Runner(const CampaignPlan& plan, const std::vector<ServiceRecord>& services,
         const std::vector<MonitoringSite>& sites, ProbeEngine& engine, ProbeSink& sink, Clock& clock,
         const RunOptions& options)
      : plan_(plan), engine_(engine), sink_(sink), clock_(clock), options_(options),
        control_(options.control ? *options.control : own_control_) {
    for (const auto& s : services) services_.emplace(s.id, &s);
    for (const auto& s : sites) {
      sites_.emplace(s.site_id, &s);
      if (s.role == SiteRole::Alternate && s.alternate_for) alternates_[*s.alternate_for].push_back(&s);
    }
  }

  RunReport run() {
    FireCursor cursor(plan_);
    while (auto tick = cursor.next()) {
      if (!wait_until(tick->at)) break;
      dispatch_tick(*tick);
      if (progress_) progress_(snapshot());
    }
    for (auto& [_, pool] : pools_) pool->wait_idle();
    pools_.clear();
    return report_;
  }

  void set_progress(const ProgressCallback& progress) { progress_ = progress; }

 private:
  RunReport snapshot() {
    std::lock_guard lock(mu_);
    return report_;
  }

  bool wait_until(Timestamp target) {
    while (!control_.stopped()) {
      const auto now = clock_.now();
      if (now >= target) return true;
      clock_.sleep_until(std::min(target, now + options_.poll_interval));
    }
    return false;
  }

  void dispatch_tick(const Tick& tick) {
    for (const auto& service_id : plan_.groups.at(tick.group)) {
      for (const auto& site_id : plan_.config.sites) {
        for (auto op : plan_.config.operations) {
          count_due();
          auto svc = services_.find(service_id);
          if (svc == services_.end()) {
            missed("unknown-service");
            continue;
          }
          auto site = sites_.find(site_id);
          if (site == sites_.end()) {
            missed("unknown-site");
            continue;
          }
          const MonitoringSite* target = route(*site->second);
          if (!target) {
            missed("site-inactive");
            continue;
          }
          if (control_.paused()) {
            missed("paused");
            continue;
          }
          dispatch(*svc->second, *target, op, tick.at);
        }
      }
    }
  }

  // Coordinator-only state: consecutive misses and active failovers.
  const MonitoringSite* route(const MonitoringSite& primary) {
    if (control_.site_active(primary)) {
      if (auto it = routes_.find(primary.site_id); it != routes_.end()) {
        spdlog::info("site {} active again; taking fires back from {}", primary.site_id, it->second->site_id);
        routes_.erase(it);
      }
      misses_[primary.site_id] = 0;
      return &primary;
    }
    if (auto it = routes_.find(primary.site_id); it != routes_.end()) {
      if (control_.site_active(*it->second)) return it->second;
      routes_.erase(it);
    }
    auto& misses = misses_[primary.site_id];
    if (misses >= options_.alternate_after_misses) {
      for (const auto* alt : alternates_[primary.site_id]) {
        if (!control_.site_active(*alt)) continue;
        routes_[primary.site_id] = alt;
        spdlog::warn("site {} missed {} fires; failing over to {}", primary.site_id, misses, alt->site_id);
        std::lock_guard lock(mu_);
        report_.failovers.emplace_back(primary.site_id, alt->site_id);
        return alt;
      }
    }
    ++misses;
    return nullptr;
  }

  void dispatch(const ServiceRecord& service, const MonitoringSite& site, Operation op, Timestamp scheduled) {
    Timestamp slot = scheduled;
    if (options_.limiter) {
      std::string host;
      try {
        host = url_host(service.canonical_url);
      } catch (const std::exception&) {
        host = service.canonical_url;
      }
      slot = options_.limiter->reserve(host, scheduled);
    }
    auto job = [this, &service, &site, op, scheduled, slot] { execute(service, site, op, scheduled, slot); };
    if (options_.workers_per_site == 0) {
      job();
      return;
    }
    auto& pool = pools_[site.site_id];
    if (!pool) pool = std::make_unique<WorkerPool>(options_.workers_per_site);
    pool->submit(std::move(job));
  }

  void execute(const ServiceRecord& service, const MonitoringSite& site, Operation op, Timestamp scheduled,
               Timestamp slot) {
    clock_.sleep_until(slot);
    std::shared_lock gate(control_.gate());
    if (control_.paused()) {
      missed("paused");
      return;
    }
    const auto start = clock_.now();
    std::optional<ProbeRecord> record;
    try {
      record = engine_.probe(service, site, op, scheduled);
    } catch (const std::exception& e) {
      spdlog::warn("probe {} from {} failed: {}", service.id, site.site_id, e.what());
      missed("engine-error");
      return;
    }
    gate.unlock();
    bool sink_failed = false;
    {
      std::lock_guard lock(sink_mu_);
      try {
        sink_.append(*record);
      } catch (const std::exception& e) {
        spdlog::error("sink rejected record for {}: {}", service.id, e.what());
        sink_failed = true;
      }
    }
    const auto lateness = std::max(Millis{0}, std::chrono::duration_cast<Millis>(start - scheduled));
    std::lock_guard lock(mu_);
    ++report_.fired;
    ++report_.fired_by_site[site.site_id];
    if (sink_failed) ++report_.sink_errors;
    report_.max_lateness = std::max(report_.max_lateness, lateness);
    if (lateness > plan_.config.lateness_bound) ++report_.late;
    std::size_t bucket = 0;
    while (bucket < std::size(kLatenessEdgesMs) && lateness.count() > kLatenessEdgesMs[bucket]) ++bucket;
    ++report_.lateness_histogram[bucket];
  }

  void count_due() {
    std::lock_guard lock(mu_);
    ++report_.due;
  }

  void missed(const std::string& reason) {
    std::lock_guard lock(mu_);
    ++report_.missed;
    ++report_.missed_by_reason[reason];
  }

  const CampaignPlan& plan_;
  ProbeEngine& engine_;
  ProbeSink& sink_;
  Clock& clock_;
  RunOptions options_;
  CampaignControl own_control_;
  CampaignControl& control_;

  std::unordered_map<std::string, const ServiceRecord*> services_;
  std::unordered_map<std::string, const MonitoringSite*> sites_;
  std::unordered_map<std::string, std::vector<const MonitoringSite*>> alternates_;
  std::unordered_map<std::string, const MonitoringSite*> routes_;
  std::unordered_map<std::string, int> misses_;
  std::map<std::string, std::unique_ptr<WorkerPool>> pools_;

  std::mutex mu_;
  std::mutex sink_mu_;
  RunReport report_;
  ProgressCallback progress_;
};

}  // namespace

RunReport run_campaign(const CampaignPlan& plan, const std::vector<ServiceRecord>& services,
                       const std::vector<MonitoringSite>& sites, ProbeEngine& engine, ProbeSink& sink,
                       Clock& clock, const RunOptions& options, const ProgressCallback& progress) {
  Runner runner(plan, services, sites, engine, sink, clock, options);
  runner.set_progress(progress);
  return runner.run();
}

}  // namespace wmsmon
