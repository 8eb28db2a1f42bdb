#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/core/error.hpp"
#include "wmsmon/model/types.hpp"
#include "wmsmon/probe/probe.hpp"
#include "wmsmon/scheduler/plan.hpp"
#include "wmsmon/scheduler/runner.hpp"
#include "wmsmon/scheduler/site.hpp"

struct sqlite3;

namespace wmsmon {

enum class StoreErrc { ReferentialViolation, DuplicateRecord, BadRange, FutureRecord, NotFound, Backend };
using StoreError = Error<StoreErrc>;

/// How far past the store's clock a probe's started_at may lie.
inline constexpr Millis kClockSkewAllowance{60'000};

enum class CampaignState { Created, Running, Paused, Finished, Stopped, Failed };

std::string_view to_string(CampaignState s);
std::optional<CampaignState> campaign_state_from_string(std::string_view s);

struct StoredCampaign {
  CampaignConfig config;
  CampaignState state = CampaignState::Created;
  std::optional<nlohmann::json> report;
  Timestamp created_at{};
  Timestamp updated_at{};
};

void to_json(nlohmann::json& j, const StoredCampaign& c);

struct ServiceQuery {
  std::optional<Liveness> liveness;
  std::optional<std::string> continent;  // server continent, case-insensitive
  std::size_t offset = 0;
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

/// Half-open window [from, to) over started_at.
struct ProbeQuery {
  std::string service_id;
  std::optional<Operation> operation;
  Timestamp from = from_epoch_ms(std::numeric_limits<std::int64_t>::min());
  Timestamp to = from_epoch_ms(std::numeric_limits<std::int64_t>::max());
  std::optional<std::string> site_id;
  std::optional<std::string> campaign_id;
};

struct ServiceLayerTree {
  std::string service_id;
  std::vector<LayerRecord> roots;
};

/// Embedded SQLite store for services, capabilities (layers flattened with
/// parent pointers), sites, campaigns and the append-only probe log.
/// Thread-safe: one connection behind a mutex.
class Store {
 public:
  /// `path` may be ":memory:". Probe timestamps are checked against `clock`.
  explicit Store(const std::string& path, const Clock& clock);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void upsert_service(const ServiceRecord& service);
  std::optional<ServiceRecord> service(const std::string& id) const;
  /// Ordered by id.
  std::vector<ServiceRecord> services(const ServiceQuery& query = {}) const;
  /// Matches of `query`, ignoring offset and limit.
  std::size_t count_services(const ServiceQuery& query = {}) const;

  /// Replaces the service's stored capabilities and layers.
  void put_capabilities(const std::string& service_id, const CapabilitiesDoc& doc);
  std::optional<CapabilitiesDoc> capabilities(const std::string& service_id) const;
  /// Layer trees rebuilt from the flattened rows.
  std::vector<LayerRecord> layers(const std::string& service_id) const;
  std::vector<ServiceLayerTree> all_layers() const;

  void set_version_support(const std::string& service_id, const std::set<WmsVersion>& versions);
  std::map<std::string, std::set<WmsVersion>> version_support() const;

  void upsert_site(const MonitoringSite& site);
  std::optional<MonitoringSite> site(const std::string& id) const;
  std::vector<MonitoringSite> sites() const;

  /// Throws DuplicateRecord when the id exists.
  void insert_campaign(const CampaignConfig& config, CampaignState state);
  void set_campaign_state(const std::string& id, CampaignState state);
  void set_campaign_report(const std::string& id, const nlohmann::json& report);
  std::optional<StoredCampaign> campaign(const std::string& id) const;
  std::vector<StoredCampaign> campaigns() const;

  /// Durable append. Throws ReferentialViolation (unknown service, site or
  /// campaign), DuplicateRecord (same service, site, operation, started_at)
  /// or FutureRecord (started_at beyond the skew allowance).
  void append_probe(const ProbeRecord& record, const std::string& campaign_id = {});
  /// Records with from <= started_at < to, ascending by started_at, then
  /// site and operation. Throws BadRange when from > to.
  std::vector<ProbeRecord> query_probes(const ProbeQuery& query) const;
  std::vector<ProbeRecord> query_probes(const std::string& service_id, Operation op, Timestamp from,
                                        Timestamp to, std::optional<std::string> site_id = std::nullopt) const;
  /// Every record in [from, to) across services, grouped by service.
  void for_each_probe(Timestamp from, Timestamp to,
                      const std::function<void(const ProbeRecord&, const std::string& campaign_id)>& fn) const;
  std::size_t probe_count() const;

 private:
  class Statement;
  void exec(const char* sql) const;
  template <typename F>
  auto locked(F&& f) const;

  sqlite3* db_ = nullptr;
  const Clock& clock_;
  mutable std::mutex mu_;
};

/// Scheduler sink writing into a store under one campaign id.
class StoreSink final : public ProbeSink {
 public:
  StoreSink(Store& store, std::string campaign_id) : store_(store), campaign_id_(std::move(campaign_id)) {}
  void append(const ProbeRecord& record) override { store_.append_probe(record, campaign_id_); }

 private:
  Store& store_;
  std::string campaign_id_;
};

}  // namespace wmsmon
