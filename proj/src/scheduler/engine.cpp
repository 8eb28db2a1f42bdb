#include "wmsmon/scheduler/engine.hpp"

#include <cmath>

#include "wmsmon/core/geo.hpp"
#include "wmsmon/core/url.hpp"

namespace wmsmon {

ProberEngine::ProberEngine(Prober& prober, SpecSource initial_spec)
    : prober_(prober), initial_spec_(std::move(initial_spec)) {}

ProbeRecord ProberEngine::probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                                Timestamp) {
  if (op == Operation::GetCapabilities) {
    std::optional<CapabilitiesDoc> doc;
    auto record = prober_.probe_getcapabilities(service, site.site_id, &doc);
    if (doc) {
      try {
        auto spec = build_getmap_spec(*doc);
        std::lock_guard lock(mu_);
        specs_[service.id] = std::move(spec);
      } catch (const std::exception&) {
        // No named layer or no format: keep whatever spec we had.
      }
    }
    return record;
  }
  std::optional<GetMapSpec> spec;
  {
    std::lock_guard lock(mu_);
    if (auto it = specs_.find(service.id); it != specs_.end()) spec = it->second;
  }
  if (!spec && initial_spec_) spec = initial_spec_(service);
  if (!spec) throw EngineError(EngineErrc::NoGetMapSpec, "no GetMap spec for " + service.id);
  return prober_.probe_getmap(service, *spec, site.site_id);
}

SimulatedProbeEngine::SimulatedProbeEngine(Clock& clock, Model model, std::uint64_t seed, bool consume_latency)
    : clock_(clock), model_(std::move(model)), seed_(seed), consume_latency_(consume_latency) {}

ProbeRecord SimulatedProbeEngine::probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                                        Timestamp scheduled) {
  // Seeded per fire so results do not depend on thread interleaving.
  const auto key = stable_id("", service.id + "|" + site.site_id + "|" + std::string(to_string(op)) + "|" +
                                     std::to_string(to_epoch_ms(scheduled)));
  std::mt19937_64 rng(seed_ ^ std::stoull(key.substr(1), nullptr, 16));
  const auto response = model_(service, site, op, rng);

  ProbeRecord r;
  r.service_id = service.id;
  r.site_id = site.site_id;
  r.operation = op;
  {
    std::lock_guard lock(mu_);
    auto now = clock_.now();
    auto [it, inserted] = last_start_.try_emplace({service.id, site.site_id, op}, now);
    if (!inserted) {
      if (now <= it->second) now = it->second + Millis{1};
      it->second = now;
    }
    r.started_at = now;
  }
  r.timing = response.timing;
  const auto c = classify_outcome(response.outcome, op);
  r.accessible = c.accessible;
  r.success = c.success;
  r.error_class = c.error_class;
  if (!r.success) r.error_detail = std::string(to_string(response.outcome));
  r.response_bytes = response.outcome == RawOutcome::Ok || response.outcome == RawOutcome::WrongPayload ||
                             response.outcome == RawOutcome::Non200
                         ? response.bytes
                         : 0;
  r.download_speed_bytes_per_s = download_speed(r.response_bytes, response.timing);
  r.http_status = c.accessible ? (response.outcome == RawOutcome::Non200 ? 500 : 200) : 0;
  if (consume_latency_) clock_.sleep_for(Millis{response.timing.total_ms});
  return r;
}

SimulatedProbeEngine::Model SimulatedProbeEngine::distance_model(double ms_per_km, double base_ms) {
  return [ms_per_km, base_ms](const ServiceRecord& service, const MonitoringSite& site, Operation,
                              std::mt19937_64&) {
    double km = 0.0;
    if (service.server_location) {
      km = haversine_km(site.location.lat, site.location.lon, service.server_location->lat,
                        service.server_location->lon);
    }
    const auto total = static_cast<std::int64_t>(std::llround(base_ms + ms_per_km * km));
    SimulatedResponse resp;
    resp.outcome = RawOutcome::Ok;
    resp.timing.dns_ms = total / 20;
    resp.timing.connect_ms = total / 4;
    resp.timing.transfer_ms = total / 5;
    resp.timing.request_processing_ms = total - resp.timing.dns_ms - resp.timing.connect_ms - resp.timing.transfer_ms;
    resp.timing.total_ms = total;
    resp.bytes = 4096;
    return resp;
  };
}

}  // namespace wmsmon
