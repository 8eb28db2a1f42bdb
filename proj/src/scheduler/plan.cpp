#include "wmsmon/scheduler/plan.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

std::string_view to_string(CampaignMode m) { return m == CampaignMode::Routine ? "routine" : "intensive"; }

std::optional<CampaignMode> campaign_mode_from_string(std::string_view s) {
  if (s == "routine") return CampaignMode::Routine;
  if (s == "intensive") return CampaignMode::Intensive;
  return std::nullopt;
}

std::vector<std::string> select_candidates(
    std::vector<ServiceRecord> services, std::size_t cap,
    const std::function<std::optional<std::string>(const std::string& host)>& resolve_ip) {
  std::sort(services.begin(), services.end(),
            [](const ServiceRecord& a, const ServiceRecord& b) { return a.id < b.id; });
  std::map<std::string, std::size_t> per_host, per_ip, per_provider;
  std::vector<std::string> admitted;
  for (const auto& s : services) {
    const auto host = url_host(s.canonical_url);
    std::optional<std::string> ip;
    if (resolve_ip && !host.empty()) ip = resolve_ip(host);
    std::optional<std::string> provider;
    if (s.provider_name && !s.provider_name->empty()) provider = to_lower(*s.provider_name);

    if (per_host[host] >= cap) continue;
    if (ip && per_ip[*ip] >= cap) continue;
    if (provider && per_provider[*provider] >= cap) continue;
    ++per_host[host];
    if (ip) ++per_ip[*ip];
    if (provider) ++per_provider[*provider];
    admitted.push_back(s.id);
  }
  return admitted;
}

std::vector<std::vector<std::string>> partition_groups(const std::vector<std::string>& ids, Millis slot_budget,
                                                       Millis cost, Millis interval) {
  if (cost.count() <= 0 || slot_budget < cost) {
    throw SchedulerError(SchedulerErrc::InfeasibleSchedule, "slot budget is smaller than one probe");
  }
  const auto size = static_cast<std::size_t>(slot_budget / cost);
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < ids.size(); i += size) {
    groups.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                        ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + size)));
  }
  if (static_cast<std::int64_t>(groups.size()) * slot_budget.count() > interval.count()) {
    throw SchedulerError(SchedulerErrc::InfeasibleSchedule,
                         std::to_string(groups.size()) + " groups of " + std::to_string(slot_budget.count()) +
                             " ms do not fit a " + std::to_string(interval.count()) + " ms interval");
  }
  return groups;
}

Millis CampaignConfig::per_probe_interval() const {
  if (mode == CampaignMode::Routine) return kWeek;
  return Millis{kDay.count() / std::max(records_per_day_target, 1)};
}

void CampaignConfig::validate() const {
  auto fail = [](const std::string& what) { throw SchedulerError(SchedulerErrc::InvalidConfig, what); };
  if (campaign_id.empty()) fail("campaign_id is required");
  if (operations.empty()) fail("at least one operation is required");
  if (records_per_day_target < 1) fail("records_per_day_target must be positive");
  if (cycle_days < 1) fail("cycle_days must be positive");
  if (expected_probe_cost.count() <= 0) fail("expected_probe_cost must be positive");
  if (lateness_bound.count() < 0) fail("lateness_bound must not be negative");
  if (end && *end <= start) fail("end must be after start");
}

void to_json(nlohmann::json& j, const CampaignConfig& c) {
  std::vector<std::string> ops;
  for (auto op : c.operations) ops.emplace_back(to_string(op));
  j = {{"campaign_id", c.campaign_id},
       {"mode", to_string(c.mode)},
       {"operations", ops},
       {"services", c.services},
       {"sites", c.sites},
       {"records_per_day_target", c.records_per_day_target},
       {"cycle_days", c.cycle_days},
       {"start", format_iso8601(c.start)},
       {"end", c.end ? nlohmann::json(format_iso8601(*c.end)) : nlohmann::json(nullptr)},
       {"slot_budget_s", c.slot_budget.count() / 1000.0},
       {"expected_probe_cost_s", c.expected_probe_cost.count() / 1000.0},
       {"lateness_bound_s", c.lateness_bound.count() / 1000.0}};
}

void from_json(const nlohmann::json& j, CampaignConfig& c) {
  auto fail = [&](const std::string& what) { throw SchedulerError(SchedulerErrc::InvalidConfig, what); };
  auto time_field = [&](const char* key) -> Timestamp {
    const auto& v = j.at(key);
    std::optional<Timestamp> t;
    if (v.is_number_integer()) t = from_epoch_ms(v.get<std::int64_t>());
    else if (v.is_string()) t = parse_iso8601(v.get<std::string>());
    if (!t) fail(std::string("bad timestamp in ") + key);
    return *t;
  };
  auto seconds = [&](const char* key, Millis fallback) {
    if (!j.contains(key)) return fallback;
    return Millis{static_cast<std::int64_t>(j.at(key).get<double>() * 1000.0 + 0.5)};
  };
  c = CampaignConfig{};
  c.campaign_id = j.at("campaign_id").get<std::string>();
  if (j.contains("mode")) {
    const auto m = campaign_mode_from_string(j.at("mode").get<std::string>());
    if (!m) fail("mode must be routine or intensive");
    c.mode = *m;
  }
  if (j.contains("operations")) {
    c.operations.clear();
    for (const auto& op : j.at("operations")) {
      const auto o = operation_from_string(op.get<std::string>());
      if (!o) fail("unknown operation " + op.get<std::string>());
      c.operations.push_back(*o);
    }
  }
  c.services = j.value("services", std::vector<std::string>{});
  c.sites = j.value("sites", std::vector<std::string>{});
  c.records_per_day_target = j.value("records_per_day_target", 48);
  c.cycle_days = j.value("cycle_days", 6);
  c.start = time_field("start");
  if (j.contains("end") && !j.at("end").is_null()) c.end = time_field("end");
  c.slot_budget = seconds("slot_budget_s", c.slot_budget);
  c.expected_probe_cost = seconds("expected_probe_cost_s", c.expected_probe_cost);
  c.lateness_bound = seconds("lateness_bound_s", c.lateness_bound);
}

CampaignPlan build_plan(const CampaignConfig& config) {
  config.validate();
  CampaignPlan plan;
  plan.config = config;
  plan.per_probe_interval = config.per_probe_interval();
  plan.groups = partition_groups(config.services, config.slot_budget, config.expected_probe_cost,
                                 plan.per_probe_interval);
  plan.group_slot = config.slot_budget;
  return plan;
}

FireCursor::FireCursor(const CampaignPlan& plan) : plan_(plan) {}

Timestamp FireCursor::tick_time(std::int64_t day, std::int64_t slot, std::size_t group) const {
  const auto& c = plan_.config;
  const auto group_offset = plan_.group_slot * static_cast<std::int64_t>(group);
  if (c.mode == CampaignMode::Routine) return c.start + kWeek * day + group_offset;
  const auto interval = plan_.per_probe_interval;
  const auto phase = Millis{(day % c.cycle_days) * interval.count() / c.cycle_days};
  return c.start + kDay * day + phase + interval * slot + group_offset;
}

std::optional<Tick> FireCursor::next() {
  // Each group's own sequence is increasing, but the phase offset can make
  // late groups of one day overlap early groups of the next, so the groups
  // are merged through a heap of their next ticks.
  auto later = [](const Tick& a, const Tick& b) { return a.at != b.at ? a.at > b.at : a.group > b.group; };
  if (!started_) {
    started_ = true;
    for (std::size_t g = 0; g < plan_.groups.size(); ++g) heap_.push_back({tick_time(0, 0, g), g, 0, 0});
    std::make_heap(heap_.begin(), heap_.end(), later);
  }
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), later);
  const Tick t = heap_.back();
  if (plan_.config.end && t.at >= *plan_.config.end) {
    heap_.clear();
    return std::nullopt;
  }
  Tick& succ = heap_.back();
  const auto per_day = plan_.config.mode == CampaignMode::Routine ? 1 : plan_.config.records_per_day_target;
  if (++succ.slot >= per_day) {
    succ.slot = 0;
    ++succ.day;
  }
  succ.at = tick_time(succ.day, succ.slot, succ.group);
  std::push_heap(heap_.begin(), heap_.end(), later);
  return t;
}

std::vector<FireTime> fire_times(const CampaignPlan& plan, Timestamp from, Timestamp to) {
  std::vector<FireTime> out;
  FireCursor cursor(plan);
  while (auto t = cursor.next()) {
    if (t->at >= to) break;
    if (t->at < from) continue;
    for (const auto& service : plan.groups[t->group]) {
      for (const auto& site : plan.config.sites) {
        for (auto op : plan.config.operations) out.push_back({service, site, op, t->at});
      }
    }
  }
  return out;
}

FoldedSeries merge_cycle(const std::vector<Timestamp>& times, int cycle_days, std::optional<Timestamp> cycle_start) {
  FoldedSeries s;
  if (times.empty()) return s;
  const Timestamp begin = cycle_start.value_or(floor_to_utc_day(*std::min_element(times.begin(), times.end())));
  const Timestamp end = begin + kDay * std::max(cycle_days, 1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < begin || times[i] >= end) {
      s.out_of_window.push_back(i);
      continue;
    }
    s.folded.push_back(Millis{ms_of_day(times[i])});
  }
  std::sort(s.folded.begin(), s.folded.end());
  if (s.folded.size() < 2) return s;
  for (std::size_t i = 1; i < s.folded.size(); ++i) s.gaps.push_back(s.folded[i] - s.folded[i - 1]);
  s.gaps.push_back(s.folded.front() + kDay - s.folded.back());
  s.max_gap = *std::max_element(s.gaps.begin(), s.gaps.end());
  return s;
}

}  // namespace wmsmon
