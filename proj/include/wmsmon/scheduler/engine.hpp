#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/probe/probe.hpp"
#include "wmsmon/scheduler/site.hpp"

namespace wmsmon {

/// Executes one scheduled probe on behalf of a monitoring site. Called from
/// worker threads; implementations must be thread-safe.
class ProbeEngine {
 public:
  virtual ~ProbeEngine() = default;
  virtual ProbeRecord probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                            Timestamp scheduled) = 0;
};

/// Destination of finished records. Calls are serialized by the runner.
class ProbeSink {
 public:
  virtual ~ProbeSink() = default;
  virtual void append(const ProbeRecord& record) = 0;
};

class CollectingSink final : public ProbeSink {
 public:
  void append(const ProbeRecord& record) override {
    std::lock_guard lock(mu_);
    records_.push_back(record);
  }
  std::vector<ProbeRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<ProbeRecord> records_;
};

enum class EngineErrc { NoGetMapSpec };
using EngineError = Error<EngineErrc>;

/// Real network probes. GetMap requests use the spec derived from the most
/// recent successful GetCapabilities of the service, falling back to
/// `initial_spec` (typically built from stored capabilities).
class ProberEngine final : public ProbeEngine {
 public:
  using SpecSource = std::function<std::optional<GetMapSpec>(const ServiceRecord&)>;

  ProberEngine(Prober& prober, SpecSource initial_spec = {});
  ProbeRecord probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                    Timestamp scheduled) override;

 private:
  Prober& prober_;
  SpecSource initial_spec_;
  std::mutex mu_;
  std::map<std::string, GetMapSpec> specs_;
};

/// What a simulated server does for one request.
struct SimulatedResponse {
  RawOutcome outcome = RawOutcome::Ok;
  TimingBreakdown timing;
  std::int64_t bytes = 0;
};

/// In-process stand-in for remote sites: responses come from a model, time
/// passes on the given clock (use a ScaledClock or ManualClock for desk-scale
/// runs).
class SimulatedProbeEngine final : public ProbeEngine {
 public:
  using Model = std::function<SimulatedResponse(const ServiceRecord&, const MonitoringSite&, Operation,
                                                std::mt19937_64& rng)>;

  SimulatedProbeEngine(Clock& clock, Model model, std::uint64_t seed = 1, bool consume_latency = true);
  ProbeRecord probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                    Timestamp scheduled) override;

  /// Latency that grows linearly with great-circle distance between the site
  /// and the service's server location; always succeeds.
  static Model distance_model(double ms_per_km, double base_ms = 20.0);

 private:
  Clock& clock_;
  Model model_;
  std::uint64_t seed_;
  bool consume_latency_;
  std::mutex mu_;
  std::map<std::tuple<std::string, std::string, Operation>, Timestamp> last_start_;
};

}  // namespace wmsmon
