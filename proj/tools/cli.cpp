#include "cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <pthread.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <map>
#include <thread>

#include "wmsmon/analytics/geoip.hpp"
#include "wmsmon/api/campaigns.hpp"
#include "wmsmon/api/reports.hpp"
#include "wmsmon/api/rest.hpp"
#include "wmsmon/core/url.hpp"
#include "wmsmon/crawler/crawl.hpp"
#include "wmsmon/model/capabilities.hpp"
#include "wmsmon/model/json_io.hpp"
#include "wmsmon/store/store.hpp"

namespace wmsmon {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Timestamp time_arg(const std::string& name, const std::string& text) {
  auto t = parse_time_param(text);
  if (!t) throw UsageError("--" + name + ": expected ISO-8601 or epoch milliseconds, got '" + text + "'");
  return *t;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Probe engine over real HTTP. GetMap requests use the first named layer of
// the service's stored capabilities.
class LiveEngine final : public ProbeEngine {
 public:
  LiveEngine(const Store& store, Clock& clock, const std::string& user_agent)
      : transport_(user_agent),
        prober_(transport_, clock),
        engine_(prober_, [&store](const ServiceRecord& s) -> std::optional<GetMapSpec> {
          auto doc = store.capabilities(s.id);
          if (!doc) return std::nullopt;
          try {
            return build_getmap_spec(*doc);
          } catch (const std::exception&) {
            return std::nullopt;
          }
        }) {}

  ProbeRecord probe(const ServiceRecord& service, const MonitoringSite& site, Operation op,
                    Timestamp scheduled) override {
    return engine_.probe(service, site, op, scheduled);
  }

 private:
  CurlTransport transport_;
  Prober prober_;
  ProberEngine engine_;
};

// Calls `on_signal` from a helper thread on SIGINT or SIGTERM while in
// scope. The signals are blocked on the calling thread and on every thread
// it starts meanwhile.
class SignalWatch {
 public:
  explicit SignalWatch(std::function<void()> on_signal) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
    thread_ = std::thread([this, f = std::move(on_signal)] {
      int sig = 0;
      while (sigwait(&set_, &sig) == 0) {
        if (sig != SIGUSR1) {
          spdlog::info("signal {}: shutting down", sig);
          f();
        } else if (done_) {
          return;
        }
      }
    });
  }
  ~SignalWatch() {
    done_ = true;
    pthread_kill(thread_.native_handle(), SIGUSR1);
    thread_.join();
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }
  SignalWatch(const SignalWatch&) = delete;
  SignalWatch& operator=(const SignalWatch&) = delete;

 private:
  sigset_t set_{};
  sigset_t old_{};
  std::atomic<bool> done_{false};
  std::thread thread_;
};

// Options shared by the commands that run probes.
struct EngineArgs {
  bool simulate = false;
  double speed = 60.0;
  double ms_per_km = 0.02;
  std::uint64_t seed = 1;
  std::string user_agent = "wmsmon/1.0";

  void add_to(CLI::App& cmd) {
    cmd.add_flag("--simulate", simulate, "Use simulated probes on an accelerated clock instead of HTTP");
    cmd.add_option("--speed", speed, "Clock acceleration for --simulate")->check(CLI::PositiveNumber);
    cmd.add_option("--ms-per-km", ms_per_km, "Simulated latency per km of site-to-server distance");
    cmd.add_option("--seed", seed, "Seed for simulated outcomes");
  }

  std::unique_ptr<Clock> make_clock() const {
    if (simulate) return std::make_unique<ScaledClock>(SystemClock().now(), speed);
    return std::make_unique<SystemClock>();
  }

  CampaignManager::EngineFactory factory(const Store& store) const {
    return [this, &store](Clock& clock) -> std::unique_ptr<ProbeEngine> {
      if (simulate) {
        return std::make_unique<SimulatedProbeEngine>(clock, SimulatedProbeEngine::distance_model(ms_per_km), seed);
      }
      return std::make_unique<LiveEngine>(store, clock, user_agent);
    };
  }
};

void print_table(std::ostream& out, const Table& table, const std::string& format, const json& document) {
  if (format == "csv") {
    out << to_csv(table);
  } else {
    out << document.dump(2) << '\n';
  }
}

Table services_table(const std::vector<ServiceRecord>& services) {
  Table t{{"id", "canonical_url", "liveness", "discovered_from", "first_seen", "last_seen", "provider_name",
           "provider_type", "publisher_software", "country", "continent", "lat", "lon"},
          {}};
  for (const auto& s : services) {
    const auto& loc = s.server_location;
    t.rows.push_back({s.id, s.canonical_url, to_string(s.liveness), to_string(s.discovered_from),
                      format_iso8601(s.first_seen), format_iso8601(s.last_seen),
                      s.provider_name ? json(*s.provider_name) : json(nullptr), to_string(s.provider_type),
                      to_string(s.publisher_software), loc ? json(loc->country) : json(nullptr),
                      loc ? json(loc->continent) : json(nullptr), loc ? json(loc->lat) : json(nullptr),
                      loc ? json(loc->lon) : json(nullptr)});
  }
  return t;
}

Table sites_table(const std::vector<MonitoringSite>& sites) {
  Table t{{"site_id", "label", "role", "active", "city", "country", "continent", "lat", "lon", "alternate_for"},
          {}};
  for (const auto& s : sites) {
    t.rows.push_back({s.site_id, s.label, to_string(s.role), s.active, s.location.city, s.location.country,
                      s.location.continent, s.location.lat, s.location.lon,
                      s.alternate_for ? json(*s.alternate_for) : json(nullptr)});
  }
  return t;
}

Table campaigns_table(const std::vector<StoredCampaign>& campaigns) {
  Table t{{"campaign_id", "state", "mode", "services", "sites", "start", "end", "due", "fired", "missed"}, {}};
  for (const auto& c : campaigns) {
    auto count = [&](const char* key) { return c.report ? c.report->value(key, json(nullptr)) : json(nullptr); };
    t.rows.push_back({c.config.campaign_id, to_string(c.state), json(c.config)["mode"], c.config.services.size(),
                      c.config.sites.size(), format_iso8601(c.config.start),
                      c.config.end ? json(format_iso8601(*c.config.end)) : json(nullptr), count("due"),
                      count("fired"), count("missed")});
  }
  return t;
}

Table probes_table(const Store& store, Timestamp from, Timestamp to, json& document) {
  Table t{{"service_id", "site_id", "operation", "started_at", "campaign_id", "accessible", "success",
           "error_class", "http_status", "dns_ms", "connect_ms", "request_processing_ms", "transfer_ms", "total_ms",
           "response_bytes"},
          {}};
  document = json::array();
  store.for_each_probe(from, to, [&](const ProbeRecord& r, const std::string& campaign) {
    auto j = json(r);
    j["campaign_id"] = campaign.empty() ? json(nullptr) : json(campaign);
    document.push_back(std::move(j));
    const auto& tm = r.timing;
    auto phase = [&](std::int64_t TimingBreakdown::*m) { return tm ? json((*tm).*m) : json(nullptr); };
    t.rows.push_back({r.service_id, r.site_id, to_string(r.operation), format_iso8601(r.started_at),
                      campaign.empty() ? json(nullptr) : json(campaign), r.accessible, r.success,
                      r.error_class ? json(to_string(*r.error_class)) : json(nullptr), r.http_status,
                      phase(&TimingBreakdown::dns_ms), phase(&TimingBreakdown::connect_ms),
                      phase(&TimingBreakdown::request_processing_ms), phase(&TimingBreakdown::transfer_ms),
                      phase(&TimingBreakdown::total_ms), r.response_bytes});
  });
  return t;
}

// POSTs to a running server's campaign endpoint; prints the reply.
int campaign_remote(const std::string& api, const std::optional<std::string>& token, const std::string& method,
                    const std::string& path, std::ostream& out, std::ostream& err) {
  httplib::Client client(api);
  client.set_read_timeout(60, 0);
  if (token) client.set_bearer_token_auth(*token);
  auto res = method == "POST" ? client.Post(path, "{}", "application/json") : client.Get(path);
  if (!res) {
    err << "cannot reach " << api << ": " << httplib::to_string(res.error()) << '\n';
    return kExitFailure;
  }
  if (res->status / 100 != 2) {
    err << "HTTP " << res->status << ": " << res->body << '\n';
    return kExitFailure;
  }
  out << json::parse(res->body).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"WMS discovery, monitoring and QoS analytics", "wmsmon"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  std::string db = "wmsmon.db";
  bool verbose = false, quiet = false;
  app.add_option("--db", db, "SQLite database file")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  // crawl
  auto* crawl_cmd = app.add_subcommand("crawl", "Discover WMS endpoints from seed pages and store them");
  std::string seeds_path, geoip_path;
  CrawlOptions crawl_opts;
  std::int64_t politeness_ms = 1000;
  bool ignore_robots = false;
  crawl_cmd->add_option("--seeds", seeds_path, "Seed file, one JSON object per line")->required();
  crawl_cmd->add_option("--budget", crawl_opts.page_budget, "Maximum page fetches")->required();
  crawl_cmd->add_option("--politeness-ms", politeness_ms, "Minimum gap between requests to one host");
  crawl_cmd->add_option("--workers", crawl_opts.workers, "Validation threads");
  crawl_cmd->add_flag("--ignore-robots", ignore_robots, "Do not consult robots.txt");
  crawl_cmd->add_option("--geoip", geoip_path, "IPv4 range CSV for locating servers");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check whether a URL is a WMS endpoint");
  std::string validate_url;
  validate_cmd->add_option("url", validate_url, "Candidate service URL")->required();

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Issue one monitoring request and print its record");
  std::string probe_url, probe_op = "getcap", probe_site = "local";
  probe_cmd->add_option("url", probe_url, "Service URL")->required();
  probe_cmd->add_option("--op", probe_op, "getcap or getmap")->check(CLI::IsMember({"getcap", "getmap"}));
  probe_cmd->add_option("--site", probe_site, "Site id written into the record");

  // site
  auto* site_cmd = app.add_subcommand("site", "Manage monitoring sites");
  site_cmd->require_subcommand(1);
  auto* site_add = site_cmd->add_subcommand("add", "Add or replace a site");
  MonitoringSite new_site;
  std::string role = "intensive";
  site_add->add_option("--id", new_site.site_id, "Site id")->required();
  site_add->add_option("--label", new_site.label, "Display label");
  site_add->add_option("--lat", new_site.location.lat, "Latitude")->required()->check(CLI::Range(-90.0, 90.0));
  site_add->add_option("--lon", new_site.location.lon, "Longitude")->required()->check(CLI::Range(-180.0, 180.0));
  site_add->add_option("--city", new_site.location.city);
  site_add->add_option("--country", new_site.location.country);
  site_add->add_option("--continent", new_site.location.continent);
  site_add->add_option("--role", role)->check(CLI::IsMember({"routine", "intensive", "alternate"}));
  auto* site_list = site_cmd->add_subcommand("list", "List sites");

  // campaign
  auto* campaign_cmd = app.add_subcommand("campaign", "Create, run and control monitoring campaigns");
  campaign_cmd->require_subcommand(1);
  std::string campaign_id, config_path, api_url = "http://127.0.0.1:8080";
  std::optional<std::string> token;
  EngineArgs engine_args;
  auto* c_create = campaign_cmd->add_subcommand("create", "Store a campaign from a JSON config");
  c_create->add_option("--config", config_path, "Campaign config JSON file")->required();
  auto* c_run = campaign_cmd->add_subcommand("run", "Run a stored campaign in the foreground");
  c_run->add_option("id", campaign_id)->required();
  engine_args.add_to(*c_run);
  auto* c_pause = campaign_cmd->add_subcommand("pause", "Pause a campaign on a running server");
  auto* c_resume = campaign_cmd->add_subcommand("resume", "Resume a campaign on a running server");
  for (auto* c : {c_pause, c_resume}) {
    c->add_option("id", campaign_id)->required();
    c->add_option("--api", api_url, "Server base URL")->capture_default_str();
    c->add_option("--token", token, "Bearer token");
  }
  auto* c_report = campaign_cmd->add_subcommand("report", "Print a campaign's run report");
  c_report->add_option("id", campaign_id)->required();
  auto* remote_report = c_report->add_option("--api", api_url, "Ask a running server instead of the database");
  c_report->add_option("--token", token, "Bearer token");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute a named analytics report");
  std::string report_name, format = "json", out_path;
  std::map<std::string, std::string> report_args;
  analyze_cmd->add_option("--report", report_name, "Report name")->required();
  std::vector<std::string> report_settings;
  auto add_window = [&](CLI::App* cmd) {
    cmd->add_option("--from", report_args["from"], "Window start (inclusive)");
    cmd->add_option("--to", report_args["to"], "Window end (exclusive)");
  };
  add_window(analyze_cmd);
  analyze_cmd->add_option("--op", report_args["op"], "Operation for latency reports");
  analyze_cmd->add_option("--set", report_settings, "Report parameter key=value (top, cell, reps, cap_ms, ...)");
  analyze_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the REST API");
  std::string bind = "127.0.0.1:8080";
  RestOptions rest_opts;
  serve_cmd->add_option("--bind", bind, "host:port")->capture_default_str();
  serve_cmd->add_option("--token", rest_opts.token, "Require this bearer token");
  serve_cmd->add_option("--static", rest_opts.static_dir, "Directory served at /");
  engine_args.add_to(*serve_cmd);

  // export
  auto* export_cmd = app.add_subcommand("export", "Export a table or report as CSV or JSON");
  std::string table_name;
  export_cmd->add_option("--table", table_name, "services, sites, campaigns, probes or a report name")->required();
  export_cmd->add_option("--format", format, "csv or json")->required()->check(CLI::IsMember({"json", "csv"}));
  export_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  add_window(export_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  auto logger = std::make_shared<spdlog::logger>("wmsmon", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
  logger->set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);
  spdlog::set_default_logger(logger);

  // Window and report parameters shared by analyze and export.
  auto params = [&] {
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : report_args) {
      if (!v.empty()) q[k] = v;
    }
    for (const auto& s : report_settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
      q[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto* key : {"from", "to"}) {
      if (q.count(key)) time_arg(key, q[key]);
    }
    try {
      return ReportParams::from_query([&](const std::string& key) -> std::optional<std::string> {
        auto it = q.find(key);
        return it == q.end() ? std::nullopt : std::optional(it->second);
      });
    } catch (const ReportError& e) {
      throw UsageError(e.what());
    }
  };
  auto report_or_usage = [&](const Store& store, const std::string& name, const ReportParams& p) {
    const auto& names = report_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      std::string all;
      for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
      throw UsageError("unknown report '" + name + "'; one of: " + all);
    }
    try {
      return build_report(store, name, p);
    } catch (const ReportError& e) {
      throw UsageError(e.what());
    }
  };

  try {
    if (crawl_cmd->parsed()) {
      SystemClock clock;
      std::ifstream seeds_in(seeds_path);
      if (!seeds_in) throw std::runtime_error("cannot read " + seeds_path);
      const auto seeds = load_seeds(seeds_in);
      Store store(db, clock);
      std::optional<GeoIpTable> geoip;
      if (!geoip_path.empty()) geoip = GeoIpTable::load_csv(std::filesystem::path(geoip_path));
      crawl_opts.politeness = Millis{politeness_ms};
      crawl_opts.honor_robots = !ignore_robots;
      if (geoip) {
        crawl_opts.locate = [&](const std::string& host) -> std::optional<GeoLocation> {
          auto ip = parse_ipv4(host) ? std::optional(host) : resolve_ipv4(host);
          return ip ? geoip->lookup(*ip) : std::nullopt;
        };
      }
      CurlTransport transport;
      const auto result = crawl(seeds, transport, clock, crawl_opts);
      json found = json::array();
      for (const auto& s : result.services) {
        auto record = s.record;
        record.liveness = Liveness::Valid;
        if (auto known = store.service(record.id)) record.first_seen = known->first_seen;
        store.upsert_service(record);
        store.put_capabilities(record.id, s.document);
        found.push_back({{"id", record.id}, {"url", record.canonical_url}});
      }
      const auto& st = result.stats;
      out << json{{"pages_fetched", st.pages_fetched},
                  {"page_failures", st.page_failures},
                  {"robots_blocked", st.robots_blocked},
                  {"candidates", st.candidates},
                  {"duplicates", st.duplicates},
                  {"validations", st.validations},
                  {"valid", st.valid},
                  {"not_wms", st.not_wms},
                  {"unreachable", st.unreachable},
                  {"services", found}}
                 .dump(2)
          << '\n';
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      CurlTransport transport;
      const auto v = validate_wms_url(CandidateUrl{validate_url, "", std::nullopt}, transport);
      json j = {{"url", validate_url},
                {"request_url", v.request_url},
                {"verdict", to_string(v.verdict)},
                {"http_status", v.http_status},
                {"root_element", v.root_element},
                {"elapsed_ms", v.elapsed.count()}};
      if (v.document) {
        j["version"] = to_string(v.document->service_version);
        j["title"] = v.document->title;
        j["named_layers"] = count_named_layers(*v.document);
      }
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (probe_cmd->parsed()) {
      SystemClock clock;
      CurlTransport transport;
      Prober prober(transport, clock);
      ServiceRecord service;
      service.canonical_url = probe_url;
      service.id = stable_id("svc", service_key(probe_url));
      std::optional<CapabilitiesDoc> doc;
      auto record = prober.probe_getcapabilities(service, probe_site, &doc);
      if (probe_op == "getmap") {
        if (!doc) {
          err << "GetCapabilities failed; cannot form a GetMap request\n" << json(record).dump(2) << '\n';
          return kExitFailure;
        }
        record = prober.probe_getmap(service, build_getmap_spec(*doc), probe_site);
      }
      out << json(record).dump(2) << '\n';
      return kExitOk;
    }

    if (site_cmd->parsed()) {
      SystemClock clock;
      Store store(db, clock);
      if (site_add->parsed()) {
        if (new_site.label.empty()) new_site.label = new_site.site_id;
        new_site.role = *site_role_from_string(role);
        if (!new_site.valid()) throw UsageError("invalid site");
        store.upsert_site(new_site);
        out << json(new_site).dump(2) << '\n';
      } else if (site_list->parsed()) {
        out << json(store.sites()).dump(2) << '\n';
      }
      return kExitOk;
    }

    if (campaign_cmd->parsed()) {
      if (c_pause->parsed() || c_resume->parsed()) {
        return campaign_remote(api_url, token, "POST",
                               "/api/v1/campaigns/" + campaign_id + (c_pause->parsed() ? "/pause" : "/resume"), out,
                               err);
      }
      if (c_report->parsed() && remote_report->count() > 0) {
        return campaign_remote(api_url, token, "GET", "/api/v1/campaigns/" + campaign_id + "/report", out, err);
      }
      auto clock = engine_args.make_clock();
      Store store(db, *clock);
      if (c_create->parsed()) {
        CampaignConfig config;
        try {
          auto j = read_json_file(config_path);
          if (!j.contains("campaign_id")) j["campaign_id"] = "";
          if (!j.contains("start")) j["start"] = to_epoch_ms(clock->now());
          config = j.get<CampaignConfig>();
        } catch (const json::exception& e) {
          throw UsageError(config_path + ": " + e.what());
        } catch (const SchedulerError& e) {
          throw UsageError(config_path + ": " + e.what());
        }
        CampaignManager manager(store, *clock, engine_args.factory(store));
        try {
          out << json(manager.create(config, false)).dump(2) << '\n';
        } catch (const CampaignError& e) {
          throw UsageError(e.what());
        }
        return kExitOk;
      }
      if (c_report->parsed()) {
        auto c = store.campaign(campaign_id);
        if (!c) throw std::runtime_error("unknown campaign " + campaign_id);
        out << json{{"campaign_id", campaign_id},
                    {"state", to_string(c->state)},
                    {"report", c->report ? *c->report : json(nullptr)}}
                   .dump(2)
            << '\n';
        return kExitOk;
      }
      if (c_run->parsed()) {
        if (!store.campaign(campaign_id)) throw std::runtime_error("unknown campaign " + campaign_id);
        CampaignManager manager(store, *clock, engine_args.factory(store));
        {
          SignalWatch watch([&] { manager.stop(campaign_id); });
          manager.launch(campaign_id);
          manager.wait(campaign_id);
        }
        const auto c = *store.campaign(campaign_id);
        out << json{{"campaign_id", campaign_id},
                    {"state", to_string(c.state)},
                    {"report", c.report ? *c.report : json(nullptr)}}
                   .dump(2)
            << '\n';
        return c.state == CampaignState::Failed ? kExitFailure : kExitOk;
      }
    }

    if (analyze_cmd->parsed()) {
      SystemClock clock;
      Store store(db, clock);
      const auto p = params();
      const auto report = report_or_usage(store, report_name, p);
      print_table(out, report.table, format, report_document(report, p));
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      auto addr = parse_bind_address(bind);
      if (!addr) throw UsageError("--bind expects host:port, got '" + bind + "'");
      auto clock = engine_args.make_clock();
      Store store(db, *clock);
      CampaignManager manager(store, *clock, engine_args.factory(store));
      RestServer server(store, &manager, rest_opts);
      SignalWatch watch([&] { server.stop(); });
      spdlog::info("serving http://{}:{}/api/v1 from {}", addr->first, addr->second, db);
      server.run(addr->first, addr->second);
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      SystemClock clock;
      Store store(db, clock);
      const auto p = params();
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + out_path);
      }
      std::ostream& dest = out_path.empty() ? out : file;
      if (table_name == "services") {
        const auto services = store.services();
        print_table(dest, services_table(services), format, services);
      } else if (table_name == "sites") {
        const auto sites = store.sites();
        print_table(dest, sites_table(sites), format, sites);
      } else if (table_name == "campaigns") {
        const auto campaigns = store.campaigns();
        print_table(dest, campaigns_table(campaigns), format, campaigns);
      } else if (table_name == "probes") {
        json doc;
        const auto table = probes_table(store, p.from, p.to, doc);
        print_table(dest, table, format, doc);
      } else {
        const auto report = report_or_usage(store, table_name, p);
        print_table(dest, report.table, format, report_document(report, p));
      }
      if (file.is_open() && !file) throw std::runtime_error("write failed: " + out_path);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace wmsmon
