#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/core/error.hpp"
#include "wmsmon/scheduler/engine.hpp"
#include "wmsmon/scheduler/runner.hpp"
#include "wmsmon/store/store.hpp"

namespace wmsmon {

enum class CampaignErrc { InvalidCampaign, UnknownCampaign, NotRunning };
using CampaignError = Error<CampaignErrc>;

/// Creates campaigns in the store and runs each on its own coordinator
/// thread, writing probe records back through a StoreSink.
class CampaignManager {
 public:
  using EngineFactory = std::function<std::unique_ptr<ProbeEngine>(Clock&)>;

  CampaignManager(Store& store, Clock& clock, EngineFactory engines, RunOptions options = {});
  /// Stops and joins every running campaign.
  ~CampaignManager();
  CampaignManager(const CampaignManager&) = delete;
  CampaignManager& operator=(const CampaignManager&) = delete;

  /// Validates the config against the store (every service and site must
  /// exist), assigns an id and a start time when missing, stores it and,
  /// when `start` is set, launches it. Throws InvalidCampaign.
  StoredCampaign create(CampaignConfig config, bool start = true);
  /// Launches a stored campaign that is not running. Throws UnknownCampaign.
  void launch(const std::string& id);

  /// Returns once no probe of the campaign can start until resume; the
  /// returned time is the acknowledgement instant.
  Timestamp pause(const std::string& id);
  Timestamp resume(const std::string& id);
  void stop(const std::string& id);
  /// Blocks until the campaign's run ends.
  void wait(const std::string& id);
  bool running(const std::string& id) const;

  /// Counts of a running campaign, else the stored final report.
  std::optional<nlohmann::json> report(const std::string& id) const;

  const Clock& clock() const { return clock_; }

 private:
  struct Active {
    CampaignControl control;
    std::thread thread;
    std::mutex join_mu;
    std::optional<RunReport> progress;
    bool done = false;
  };

  void run(const std::string& id, Active& active);
  Active& active(const std::string& id);

  Store& store_;
  Clock& clock_;
  EngineFactory engines_;
  RunOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Active>> active_;
};

}  // namespace wmsmon
