#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmsmon/core/error.hpp"
#include "wmsmon/core/time.hpp"
#include "wmsmon/model/types.hpp"
#include "wmsmon/probe/probe.hpp"

namespace wmsmon {

enum class SchedulerErrc { InfeasibleSchedule, InvalidConfig };
using SchedulerError = Error<SchedulerErrc>;

enum class CampaignMode { Routine, Intensive };

std::string_view to_string(CampaignMode m);
std::optional<CampaignMode> campaign_mode_from_string(std::string_view s);

inline constexpr Millis kDay{24LL * 3600 * 1000};
inline constexpr Millis kWeek{7 * kDay};

/// Greedy admission in ascending id order: a service is taken while its
/// host, its resolved IP (when `resolve_ip` knows it) and its provider name
/// each have fewer than `cap` admitted services.
std::vector<std::string> select_candidates(
    std::vector<ServiceRecord> services, std::size_t cap_per_provider = 5,
    const std::function<std::optional<std::string>(const std::string& host)>& resolve_ip = {});

/// Contiguous groups of floor(slot_budget / expected_probe_cost) services.
/// Throws InfeasibleSchedule when the groups' slots do not fit one interval.
std::vector<std::vector<std::string>> partition_groups(const std::vector<std::string>& service_ids,
                                                       Millis slot_budget, Millis expected_probe_cost,
                                                       Millis per_probe_interval);

struct CampaignConfig {
  std::string campaign_id;
  CampaignMode mode = CampaignMode::Intensive;
  std::vector<Operation> operations{Operation::GetCapabilities, Operation::GetMap};
  std::vector<std::string> services;
  std::vector<std::string> sites;
  int records_per_day_target = 48;
  int cycle_days = 6;
  Timestamp start{};
  std::optional<Timestamp> end;
  Millis slot_budget{300'000};
  Millis expected_probe_cost{3'000};
  Millis lateness_bound{10'000};

  /// 7 days for routine campaigns, else 24 h / records_per_day_target.
  Millis per_probe_interval() const;
  void validate() const;  // throws InvalidConfig
};

void to_json(nlohmann::json& j, const CampaignConfig& c);
void from_json(const nlohmann::json& j, CampaignConfig& c);

struct CampaignPlan {
  CampaignConfig config;
  std::vector<std::vector<std::string>> groups;
  Millis per_probe_interval{0};
  Millis group_slot{0};  // offset between consecutive groups
};

CampaignPlan build_plan(const CampaignConfig& config);

/// One scheduling instant: every service of `group` is due at `at` on every
/// site of the plan, for every operation.
struct Tick {
  Timestamp at{};
  std::size_t group = 0;
  std::int64_t day = 0;  // day index from the start (week index for routine)
  std::int64_t slot = 0;  // fire index within that day
};

/// Walks a plan's ticks in time order. Within a day, fire k of group g is at
/// day_start + (day mod cycle_days) * interval / cycle_days + k * interval +
/// g * group_slot.
class FireCursor {
 public:
  explicit FireCursor(const CampaignPlan& plan);
  /// Next tick before the plan's end (or forever when open-ended).
  std::optional<Tick> next();

 private:
  Timestamp tick_time(std::int64_t day, std::int64_t slot, std::size_t group) const;

  const CampaignPlan& plan_;
  std::vector<Tick> heap_;
  bool started_ = false;
};

struct FireTime {
  std::string service_id;
  std::string site_id;
  Operation operation = Operation::GetCapabilities;
  Timestamp at{};

  friend bool operator==(const FireTime&, const FireTime&) = default;
};

/// All fires in [from, to), in time order. For tests and reporting; the
/// runner streams ticks instead.
std::vector<FireTime> fire_times(const CampaignPlan& plan, Timestamp from, Timestamp to);

struct FoldedSeries {
  std::vector<Millis> folded;          // time of day, ascending
  std::vector<Millis> gaps;            // consecutive gaps plus the wrap-around gap
  Millis max_gap{0};
  std::vector<std::size_t> out_of_window;  // input indices outside the cycle
};

/// Folds one cycle of timestamps into a single virtual day. The cycle starts
/// at `cycle_start` (default: UTC midnight of the earliest timestamp) and
/// lasts `cycle_days`; timestamps outside it are reported, not folded.
FoldedSeries merge_cycle(const std::vector<Timestamp>& times, int cycle_days,
                         std::optional<Timestamp> cycle_start = std::nullopt);

}  // namespace wmsmon
