#include "wmsmon/api/rest.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

#include "wmsmon/analytics/qos.hpp"
#include "wmsmon/analytics/spatial.hpp"
#include "wmsmon/api/reports.hpp"
#include "wmsmon/core/url.hpp"
#include "wmsmon/model/json_io.hpp"

namespace wmsmon {

namespace {

using nlohmann::json;

/// Raised inside handlers; turned into a JSON error response.
struct HttpError {
  int status;
  std::string message;
};

[[noreturn]] void bad_request(const std::string& msg) { throw HttpError{400, msg}; }
[[noreturn]] void not_found(const std::string& msg) { throw HttpError{404, msg}; }

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

std::size_t positive_int(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || v == 0) bad_request(key + " must be a positive integer");
  return v;
}

Timestamp time_param(const httplib::Request& req, const char* key, Timestamp fallback) {
  auto v = param(req, key);
  if (!v) return fallback;
  auto t = parse_time_param(*v);
  if (!t) bad_request(std::string("bad ") + key + ": " + *v);
  return *t;
}

std::optional<Operation> op_param(const httplib::Request& req) {
  auto v = param(req, "op");
  if (!v) return std::nullopt;
  auto op = parse_operation_param(*v);
  if (!op) bad_request("op must be getcap or getmap");
  return op;
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) bad_request("body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    bad_request(std::string("malformed JSON: ") + e.what());
  }
}

// Runs a handler, mapping known failures to statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const HttpError& e) {
      send(res, e.status, {{"error", e.message}, {"status", e.status}});
    } catch (const ReportError& e) {
      const int status = e.kind() == ReportErrc::UnknownReport ? 404 : 400;
      send(res, status, {{"error", e.what()}, {"status", status}});
    } catch (const StoreError& e) {
      const int status = e.kind() == StoreErrc::BadRange ? 400 : e.kind() == StoreErrc::NotFound ? 404 : 500;
      send(res, status, {{"error", e.what()}, {"status", status}});
    } catch (const CampaignError& e) {
      const int status = e.kind() == CampaignErrc::UnknownCampaign ? 404
                         : e.kind() == CampaignErrc::NotRunning    ? 409
                                                                   : 400;
      send(res, status, {{"error", e.what()}, {"status", status}});
    } catch (const SchedulerError& e) {
      send(res, 400, {{"error", e.what()}, {"status", 400}});
    } catch (const json::exception& e) {
      send(res, 400, {{"error", std::string("invalid document: ") + e.what()}, {"status", 400}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send(res, 500, {{"error", "internal error"}, {"status", 500}});
    }
  };
}

constexpr Timestamp kBeginning = Timestamp::min();
constexpr Timestamp kEnd = Timestamp::max();

}  // namespace

std::optional<std::pair<std::string, int>> parse_bind_address(std::string_view text) {
  std::string host = "127.0.0.1";
  std::string_view port_text = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  int port = -1;
  const auto* end = port_text.data() + port_text.size();
  auto [ptr, ec] = std::from_chars(port_text.data(), end, port);
  if (ec != std::errc() || ptr != end || port < 0 || port > 65535) return std::nullopt;
  return std::pair{host, port};
}

RestServer::RestServer(Store& store, CampaignManager* campaigns, RestOptions options)
    : store_(store), campaigns_(campaigns), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // share a taken port instead of failing.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  routes();
}

RestServer::~RestServer() { stop(); }

int RestServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) throw ApiError(ApiErrc::AddressInUse, "cannot bind " + host);
  } else if (!server_->bind_to_port(host, port)) {
    throw ApiError(ApiErrc::AddressInUse, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void RestServer::run(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) {
    throw ApiError(ApiErrc::AddressInUse, "cannot bind " + host + ":" + std::to_string(port));
  }
  server_->listen_after_bind();
}

void RestServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void RestServer::routes() {
  auto& svr = *server_;
  const auto opts = options_;

  if (opts.token) {
    svr.set_pre_routing_handler([token = *opts.token](const httplib::Request& req, httplib::Response& res) {
      if (req.path.rfind("/api/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == "Bearer " + token) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      send(res, 401, {{"error", "missing or wrong bearer token"}, {"status", 401}});
      return httplib::Server::HandlerResponse::Handled;
    });
  }
  if (opts.static_dir && !svr.set_mount_point("/", *opts.static_dir)) {
    spdlog::warn("static directory {} not found; serving the API only", *opts.static_dir);
  }

  auto require_service = [this](const std::string& id) {
    auto s = store_.service(id);
    if (!s) not_found("unknown service " + id);
    return *s;
  };

  svr.Get("/api/v1/sites", guarded([this](const httplib::Request&, httplib::Response& res) {
            send(res, 200, store_.sites());
          }));

  svr.Get(R"(/api/v1/sites/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto s = store_.site(req.matches[1]);
            if (!s) not_found("unknown site " + std::string(req.matches[1]));
            send(res, 200, *s);
          }));

  svr.Post("/api/v1/sites", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto site = parse_body(req).get<MonitoringSite>();
             if (!site.valid()) bad_request("invalid site");
             store_.upsert_site(site);
             send(res, 201, site);
           }));

  svr.Get("/api/v1/services", guarded([this, opts](const httplib::Request& req, httplib::Response& res) {
            ServiceQuery q;
            if (auto v = param(req, "liveness")) {
              q.liveness = liveness_from_string(to_lower(*v));
              if (!q.liveness) bad_request("liveness must be valid, invalid or unknown");
            }
            if (auto v = param(req, "continent"); v && !v->empty()) q.continent = *v;
            const std::size_t page = param(req, "page") ? positive_int("page", *param(req, "page")) : 1;
            const std::size_t per_page =
                param(req, "per_page") ? positive_int("per_page", *param(req, "per_page")) : opts.default_page_size;
            if (per_page > opts.max_page_size) {
              bad_request("per_page is limited to " + std::to_string(opts.max_page_size));
            }
            q.limit = per_page;
            q.offset = (page - 1) * per_page;
            send(res, 200,
                 {{"page", page}, {"per_page", per_page}, {"total", store_.count_services(q)},
                  {"items", store_.services(q)}});
          }));

  svr.Post("/api/v1/services", guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto body = parse_body(req);
             if (!body.contains("canonical_url")) bad_request("canonical_url is required");
             if (!body.contains("id")) body["id"] = stable_id("svc", body.at("canonical_url").get<std::string>());
             const auto service = body.get<ServiceRecord>();
             store_.upsert_service(service);
             send(res, 201, service);
           }));

  svr.Get(R"(/api/v1/services/([^/]+))",
          guarded([require_service](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, require_service(req.matches[1]));
          }));

  svr.Get(R"(/api/v1/services/([^/]+)/layers)",
          guarded([this, require_service](const httplib::Request& req, httplib::Response& res) {
            const auto id = require_service(req.matches[1]).id;
            send(res, 200, store_.layers(id));
          }));

  svr.Get(R"(/api/v1/services/([^/]+)/probes)",
          guarded([this, require_service](const httplib::Request& req, httplib::Response& res) {
            ProbeQuery q;
            q.service_id = require_service(req.matches[1]).id;
            q.operation = op_param(req);
            q.from = time_param(req, "from", kBeginning);
            q.to = time_param(req, "to", kEnd);
            if (q.from > q.to) bad_request("from is after to");
            if (auto site = param(req, "site")) {
              if (!store_.site(*site)) not_found("unknown site " + *site);
              q.site_id = *site;
            }
            if (auto campaign = param(req, "campaign")) {
              if (!store_.campaign(*campaign)) not_found("unknown campaign " + *campaign);
              q.campaign_id = *campaign;
            }
            const auto records = store_.query_probes(q);
            send(res, 200, {{"service_id", q.service_id}, {"count", records.size()}, {"records", records}});
          }));

  svr.Get(R"(/api/v1/services/([^/]+)/summary)",
          guarded([this, require_service](const httplib::Request& req, httplib::Response& res) {
            const auto id = require_service(req.matches[1]).id;
            const auto op = op_param(req).value_or(Operation::GetCapabilities);
            const auto from = time_param(req, "from", kBeginning);
            const auto to = time_param(req, "to", kEnd);
            if (from > to) bad_request("from is after to");
            const auto records = store_.query_probes(id, op, from, to);
            json body;
            if (records.empty()) {
              body = {{"service_id", id},          {"operation", to_string(op)}, {"n_probes", 0},
                      {"n_accessible", 0},         {"n_success", 0},             {"successability", nullptr},
                      {"accessibility_class", nullptr}, {"rt_min_ms", nullptr},  {"rt_avg_ms", nullptr},
                      {"rt_max_ms", nullptr},      {"error_shares", nullptr}};
            } else {
              body = summarize_qos(id, op, records.front().started_at, records.back().started_at, records);
              QosAccumulator acc;
              for (const auto& r : records) acc.add(r);
              const auto failed = acc.n_probes() - acc.n_success();
              body["error_shares"] =
                  failed == 0 ? json(nullptr)
                              : json{{"failed", failed},
                                     {"server_access", acc.error_shares().server_access},
                                     {"request_processing", acc.error_shares().request_processing}};
            }
            if (from != kBeginning) body["from"] = format_iso8601(from);
            if (to != kEnd) body["to"] = format_iso8601(to);
            send(res, 200, body);
          }));

  svr.Get(R"(/api/v1/services/([^/]+)/folded)",
          guarded([this, require_service](const httplib::Request& req, httplib::Response& res) {
            const auto id = require_service(req.matches[1]).id;
            ProbeQuery q;
            q.service_id = id;
            q.operation = op_param(req).value_or(Operation::GetCapabilities);
            q.from = time_param(req, "from", kBeginning);
            q.to = time_param(req, "to", kEnd);
            if (q.from > q.to) bad_request("from is after to");
            if (auto site = param(req, "site")) q.site_id = *site;
            const int cycle_days =
                param(req, "cycle_days") ? static_cast<int>(positive_int("cycle_days", *param(req, "cycle_days"))) : 6;
            const auto records = store_.query_probes(q);
            std::vector<Timestamp> times;
            for (const auto& r : records) times.push_back(r.started_at);
            const auto folded = merge_cycle(times, cycle_days);
            std::set<std::size_t> outside(folded.out_of_window.begin(), folded.out_of_window.end());
            json points = json::array();
            for (std::size_t i = 0; i < records.size(); ++i) {
              if (outside.count(i)) continue;
              const auto& r = records[i];
              points.push_back({{"time_of_day_ms", ms_of_day(r.started_at)},
                                {"started_at", format_iso8601(r.started_at)},
                                {"site_id", r.site_id},
                                {"success", r.success},
                                {"rt_ms", r.timing ? json(r.timing->total_ms) : json(nullptr)}});
            }
            std::stable_sort(points.begin(), points.end(), [](const json& a, const json& b) {
              return a.at("time_of_day_ms").get<std::int64_t>() < b.at("time_of_day_ms").get<std::int64_t>();
            });
            send(res, 200,
                 {{"service_id", id},
                  {"operation", to_string(*q.operation)},
                  {"cycle_days", cycle_days},
                  {"max_gap_ms", folded.max_gap.count()},
                  {"out_of_window", folded.out_of_window.size()},
                  {"points", points}});
          }));

  svr.Get(R"(/api/v1/services/([^/]+)/diurnal)",
          guarded([this, require_service](const httplib::Request& req, httplib::Response& res) {
            const auto service = require_service(req.matches[1]);
            const auto op = op_param(req).value_or(Operation::GetCapabilities);
            const auto from = time_param(req, "from", kBeginning);
            const auto to = time_param(req, "to", kEnd);
            if (from > to) bad_request("from is after to");
            std::vector<TimedValue> values;
            for (const auto& r : store_.query_probes(service.id, op, from, to, param(req, "site"))) {
              if (r.success && r.timing) values.push_back({r.started_at, static_cast<double>(r.timing->total_ms)});
            }
            DiurnalOptions dopt;
            if (auto v = param(req, "utc_offset")) {
              int off = 0;
              auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), off);
              if (ec != std::errc() || ptr != v->data() + v->size() || off < -12 || off > 14) {
                bad_request("utc_offset must be an integer hour offset");
              }
              dopt.utc_offset_hours = off;
            }
            const double lon = service.server_location ? service.server_location->lon : 0.0;
            send(res, 200, diurnal_series(values, lon, dopt));
          }));

  svr.Get("/api/v1/reports", guarded([](const httplib::Request&, httplib::Response& res) {
            send(res, 200, report_names());
          }));

  svr.Get(R"(/api/v1/reports/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto params = ReportParams::from_query([&](const std::string& key) { return param(req, key.c_str()); });
            const auto format = param(req, "format").value_or("json");
            if (format != "json" && format != "csv") bad_request("format must be json or csv");
            const auto report = build_report(store_, std::string(req.matches[1]), params);
            if (format == "csv") {
              res.status = 200;
              res.set_content(to_csv(report.table), "text/csv; charset=utf-8");
              return;
            }
            send(res, 200, report_document(report, params));
          }));

  auto manager = [this]() -> CampaignManager& {
    if (!campaigns_) throw HttpError{503, "campaign control is not available"};
    return *campaigns_;
  };

  svr.Get("/api/v1/campaigns", guarded([this](const httplib::Request&, httplib::Response& res) {
            send(res, 200, store_.campaigns());
          }));

  svr.Post("/api/v1/campaigns", guarded([this, manager](const httplib::Request& req, httplib::Response& res) {
             auto& m = manager();
             auto body = parse_body(req);
             if (!body.contains("campaign_id")) body["campaign_id"] = "";
             if (!body.contains("start")) body["start"] = to_epoch_ms(m.clock().now());
             const auto config = body.get<CampaignConfig>();
             send(res, 201, m.create(config));
           }));

  svr.Get(R"(/api/v1/campaigns/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto c = store_.campaign(req.matches[1]);
            if (!c) not_found("unknown campaign " + std::string(req.matches[1]));
            send(res, 200, *c);
          }));

  svr.Post(R"(/api/v1/campaigns/([^/]+)/(pause|resume|stop))",
           guarded([this, manager](const httplib::Request& req, httplib::Response& res) {
             auto& m = manager();
             const std::string id = req.matches[1];
             const std::string action = req.matches[2];
             if (!store_.campaign(id)) not_found("unknown campaign " + id);
             json body = {{"campaign_id", id}};
             if (action == "pause") {
               body["acknowledged_at"] = format_iso8601(m.pause(id));
             } else if (action == "resume") {
               body["acknowledged_at"] = format_iso8601(m.resume(id));
             } else {
               m.stop(id);
             }
             body["state"] = to_string(store_.campaign(id)->state);
             send(res, 200, body);
           }));

  svr.Get(R"(/api/v1/campaigns/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            auto c = store_.campaign(id);
            if (!c) not_found("unknown campaign " + id);
            std::optional<json> report = campaigns_ ? campaigns_->report(id) : c->report;
            send(res, 200,
                 {{"campaign_id", id}, {"state", to_string(c->state)}, {"report", report ? *report : json(nullptr)}});
          }));

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    send(res, res.status, {{"error", res.status == 404 ? "no such resource" : "request failed"}, {"status", res.status}});
  });
}

}  // namespace wmsmon
