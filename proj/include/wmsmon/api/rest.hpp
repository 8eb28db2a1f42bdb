#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "wmsmon/api/campaigns.hpp"
#include "wmsmon/core/error.hpp"
#include "wmsmon/store/store.hpp"

namespace httplib {
class Server;
}

namespace wmsmon {

enum class ApiErrc { AddressInUse };
using ApiError = Error<ApiErrc>;

struct RestOptions {
  std::size_t default_page_size = 100;
  std::size_t max_page_size = 1000;
  // When set, every request needs "Authorization: Bearer <token>".
  std::optional<std::string> token;
  // Directory served at / (the portal bundle), if any.
  std::optional<std::string> static_dir;
};

/// JSON REST API under /api/v1 over a store. Campaign endpoints need a
/// manager; without one they answer 503.
class RestServer {
 public:
  RestServer(Store& store, CampaignManager* campaigns, RestOptions options = {});
  ~RestServer();
  RestServer(const RestServer&) = delete;
  RestServer& operator=(const RestServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port. Throws AddressInUse.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  void routes();

  Store& store_;
  CampaignManager* campaigns_;
  RestOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// "host:port" (or ":port", or a bare port) into its parts. Host defaults to
/// 127.0.0.1.
std::optional<std::pair<std::string, int>> parse_bind_address(std::string_view text);

}  // namespace wmsmon
