#include "wmsmon/api/campaigns.hpp"

#include <spdlog/spdlog.h>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

CampaignManager::CampaignManager(Store& store, Clock& clock, EngineFactory engines, RunOptions options)
    : store_(store), clock_(clock), engines_(std::move(engines)), options_(options) {}

CampaignManager::~CampaignManager() {
  std::map<std::string, std::unique_ptr<Active>> all;
  {
    std::lock_guard lock(mu_);
    all.swap(active_);
  }
  for (auto& [_, a] : all) {
    a->control.stop();
    a->control.resume();
  }
  for (auto& [_, a] : all) {
    if (a->thread.joinable()) a->thread.join();
  }
}

StoredCampaign CampaignManager::create(CampaignConfig config, bool start) {
  auto invalid = [](const std::string& what) { throw CampaignError(CampaignErrc::InvalidCampaign, what); };
  if (config.campaign_id.empty()) {
    config.campaign_id =
        stable_id("cmp", nlohmann::json(config).dump() + "@" + std::to_string(to_epoch_ms(clock_.now())));
  }
  if (config.services.empty()) invalid("a campaign needs at least one service");
  if (config.sites.empty()) invalid("a campaign needs at least one site");
  for (const auto& id : config.services) {
    if (!store_.service(id)) invalid("unknown service " + id);
  }
  for (const auto& id : config.sites) {
    if (!store_.site(id)) invalid("unknown site " + id);
  }
  try {
    build_plan(config);
  } catch (const SchedulerError& e) {
    invalid(e.what());
  }
  try {
    store_.insert_campaign(config, CampaignState::Created);
  } catch (const StoreError& e) {
    if (e.kind() == StoreErrc::DuplicateRecord) invalid(e.what());
    throw;
  }
  if (start) launch(config.campaign_id);
  return *store_.campaign(config.campaign_id);
}

void CampaignManager::launch(const std::string& id) {
  if (!store_.campaign(id)) throw CampaignError(CampaignErrc::UnknownCampaign, "unknown campaign " + id);
  std::lock_guard lock(mu_);
  auto& slot = active_[id];
  if (slot && !slot->done) throw CampaignError(CampaignErrc::InvalidCampaign, "campaign " + id + " is running");
  if (slot && slot->thread.joinable()) slot->thread.join();
  slot = std::make_unique<Active>();
  Active& a = *slot;
  a.thread = std::thread([this, id, &a] { run(id, a); });
}

void CampaignManager::run(const std::string& id, Active& a) {
  RunReport final_report;
  CampaignState final_state = CampaignState::Finished;
  try {
    const auto stored = store_.campaign(id);
    const auto plan = build_plan(stored->config);
    std::vector<ServiceRecord> services;
    for (const auto& sid : stored->config.services) {
      if (auto s = store_.service(sid)) services.push_back(std::move(*s));
    }
    const auto sites = store_.sites();
    auto engine = engines_(clock_);
    StoreSink sink(store_, id);
    store_.set_campaign_state(id, CampaignState::Running);
    auto options = options_;
    options.control = &a.control;
    spdlog::info("campaign {} started", id);
    final_report = run_campaign(plan, services, sites, *engine, sink, clock_, options, [&](const RunReport& r) {
      std::lock_guard lock(mu_);
      a.progress = r;
    });
    if (a.control.stopped()) final_state = CampaignState::Stopped;
    store_.set_campaign_report(id, final_report);
    spdlog::info("campaign {} {}: {} due, {} fired, {} missed", id, to_string(final_state), final_report.due,
                 final_report.fired, final_report.missed);
  } catch (const std::exception& e) {
    spdlog::error("campaign {} failed: {}", id, e.what());
    final_state = CampaignState::Failed;
  }
  try {
    store_.set_campaign_state(id, final_state);
  } catch (const std::exception& e) {
    spdlog::error("campaign {}: cannot record final state: {}", id, e.what());
  }
  std::lock_guard lock(mu_);
  a.progress = final_report;
  a.done = true;
}

CampaignManager::Active& CampaignManager::active(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end() || it->second->done) {
    if (!store_.campaign(id)) throw CampaignError(CampaignErrc::UnknownCampaign, "unknown campaign " + id);
    throw CampaignError(CampaignErrc::NotRunning, "campaign " + id + " is not running");
  }
  return *it->second;
}

Timestamp CampaignManager::pause(const std::string& id) {
  auto& a = active(id);
  a.control.pause();
  a.control.quiesce();
  const auto ack = clock_.now();
  store_.set_campaign_state(id, CampaignState::Paused);
  spdlog::info("campaign {} paused", id);
  return ack;
}

Timestamp CampaignManager::resume(const std::string& id) {
  auto& a = active(id);
  store_.set_campaign_state(id, CampaignState::Running);
  const auto at = clock_.now();
  a.control.resume();
  spdlog::info("campaign {} resumed", id);
  return at;
}

void CampaignManager::stop(const std::string& id) {
  auto& a = active(id);
  a.control.stop();
  a.control.resume();
}

void CampaignManager::wait(const std::string& id) {
  Active* a = nullptr;
  {
    std::lock_guard lock(mu_);
    auto it = active_.find(id);
    if (it == active_.end()) return;
    a = it->second.get();
  }
  std::lock_guard join_lock(a->join_mu);
  if (a->thread.joinable()) a->thread.join();
}

bool CampaignManager::running(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = active_.find(id);
  return it != active_.end() && !it->second->done;
}

std::optional<nlohmann::json> CampaignManager::report(const std::string& id) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = active_.find(id); it != active_.end() && it->second->progress) {
      return nlohmann::json(*it->second->progress);
    }
  }
  auto stored = store_.campaign(id);
  if (!stored) throw CampaignError(CampaignErrc::UnknownCampaign, "unknown campaign " + id);
  return stored->report;
}

}  // namespace wmsmon
