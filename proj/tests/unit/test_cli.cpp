#include <catch_amalgamated.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "crawl_corpus.hpp"
#include "fixtures.hpp"
#include "mock_server.hpp"
#include "store_fixtures.hpp"
#include "wmsmon/core/url.hpp"
#include "wmsmon/model/json_io.hpp"

using namespace wmsmon;
using namespace wmsmon::testing;
using namespace std::chrono_literals;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// A scratch directory holding the database for one test.
class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("wmsmon_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string db() const { return (dir_ / "test.db").string(); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  Run run(std::vector<std::string> args) const {
    args.insert(args.begin(), {"--db", db(), "--quiet"});
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

void serve_wms(MockServer& mock) {
  mock.server().Get("/wms", [](const httplib::Request& req, httplib::Response& res) {
    std::string request;
    for (const auto& [k, v] : req.params) {
      if (iequals(k, "request")) request = v;
    }
    if (iequals(request, "GetMap")) {
      res.set_content(std::string("\x89PNG\r\n\x1a\n", 8) + "pixels", "image/png");
    } else {
      res.set_content(read_fixture("capabilities/wms_1_3_0_three_layers.xml"), "text/xml");
    }
  });
  mock.start();
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

pid_t spawn(const std::vector<std::string>& args) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  return pid;
}

int wait_exit(pid_t pid) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("usage errors exit 1", "[cli]") {
  Workspace ws;
  CHECK(ws.run({}).code == kExitUsage);
  CHECK(ws.run({"frobnicate"}).code == kExitUsage);
  CHECK(ws.run({"probe", "http://h/wms", "--op", "describe"}).code == kExitUsage);
  CHECK(ws.run({"crawl", "--seeds", "x"}).code == kExitUsage);  // --budget missing
  CHECK(ws.run({"analyze", "--report", "nope"}).code == kExitUsage);
  CHECK(ws.run({"analyze", "--report", "errors", "--from", "last week"}).code == kExitUsage);
  CHECK(ws.run({"analyze", "--report", "keywords", "--set", "top"}).code == kExitUsage);
  CHECK(ws.run({"export", "--table", "services", "--format", "xml"}).code == kExitUsage);
  CHECK(ws.run({"serve", "--bind", "localhost:http"}).code == kExitUsage);
  CHECK(ws.run({"site", "add", "--id", "x", "--lat", "91", "--lon", "0"}).code == kExitUsage);

  const auto help = ws.run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("campaign") != std::string::npos);
}

TEST_CASE("runtime failures exit 2", "[cli]") {
  Workspace ws;
  CHECK(ws.run({"campaign", "report", "cmp-none"}).code == kExitFailure);
  CHECK(ws.run({"crawl", "--seeds", ws.path("missing.jsonl"), "--budget", "5"}).code == kExitFailure);
  const auto unreachable = ws.run({"campaign", "pause", "c", "--api", "http://127.0.0.1:" + std::to_string(free_port())});
  CHECK(unreachable.code == kExitFailure);
  CHECK(unreachable.err.find("cannot reach") != std::string::npos);
  CHECK(ws.run({"probe", "http://127.0.0.1:" + std::to_string(free_port()) + "/wms", "--op", "getmap"}).code ==
        kExitFailure);
}

TEST_CASE("validate and probe against a live server", "[cli]") {
  Workspace ws;
  MockServer mock;
  serve_wms(mock);

  const auto v = ws.run({"validate", mock.base_url() + "/wms"});
  REQUIRE(v.code == kExitOk);
  const auto doc = json::parse(v.out);
  CHECK(doc["verdict"] == "valid-wms");
  CHECK(doc["named_layers"] == 3);

  for (const auto* op : {"getcap", "getmap"}) {
    INFO(op);
    const auto p = ws.run({"probe", mock.base_url() + "/wms", "--op", op, "--site", "desk"});
    REQUIRE(p.code == kExitOk);
    const auto record = json::parse(p.out).get<ProbeRecord>();
    CHECK(record.success);
    CHECK(record.site_id == "desk");
    CHECK(record.operation == (std::string(op) == "getmap" ? Operation::GetMap : Operation::GetCapabilities));
    CHECK(record.consistent());
  }
}

TEST_CASE("crawl stores what it finds", "[cli]") {
  Workspace ws;
  MockServer mock;
  const int port = free_port();
  const CrawlCorpus planted("http://127.0.0.1:" + std::to_string(port));
  planted.serve(mock);
  mock.start(port);
  ws.write("seeds.jsonl", json{{"url", planted.seed_url()}, {"max_depth", planted.seed_depth()}}.dump() + "\n");

  const auto r = ws.run({"crawl", "--seeds", ws.path("seeds.jsonl"), "--budget", "200", "--politeness-ms", "0"});
  REQUIRE(r.code == kExitOk);
  const auto summary = json::parse(r.out);
  std::set<std::string> found;
  for (const auto& s : summary["services"]) found.insert(s["url"].get<std::string>());
  const auto keys = planted.planted_keys();
  CHECK(found == std::set<std::string>(keys.begin(), keys.end()));

  const auto exported = ws.run({"export", "--table", "services", "--format", "json"});
  REQUIRE(exported.code == kExitOk);
  CHECK(json::parse(exported.out).size() == keys.size());
  const auto versions = ws.run({"analyze", "--report", "crs"});
  CHECK(versions.code == kExitOk);
}

TEST_CASE("campaign create, run and report", "[cli][campaign]") {
  Workspace ws;
  {
    SystemClock clock;
    Store store(ws.db(), clock);
    for (int i = 0; i < 4; ++i) store.upsert_service(stored_service("svc-" + std::to_string(i)));
  }
  CHECK(ws.run({"site", "add", "--id", "eu", "--lat", "50.1", "--lon", "8.7", "--continent", "Europe"}).code ==
        kExitOk);
  CHECK(ws.run({"site", "add", "--id", "asia", "--lat", "1.3", "--lon", "103.8"}).code == kExitOk);

  const auto start = to_epoch_ms(SystemClock().now());
  json config = {{"campaign_id", "desk-test"},
                 {"services", {"svc-0", "svc-1", "svc-2", "svc-3"}},
                 {"sites", {"eu", "asia"}},
                 {"operations", {"get_capabilities", "get_map"}},
                 {"records_per_day_target", 1440},
                 {"cycle_days", 1},
                 {"start", start},
                 {"end", start + 10 * 60'000},
                 {"slot_budget_s", 30},
                 {"expected_probe_cost_s", 1}};
  ws.write("campaign.json", config.dump());
  const auto created = ws.run({"campaign", "create", "--config", ws.path("campaign.json")});
  REQUIRE(created.code == kExitOk);
  CHECK(json::parse(created.out)["state"] == "created");
  CHECK(ws.run({"campaign", "create", "--config", ws.path("campaign.json")}).code == kExitUsage);

  const auto ran = ws.run({"campaign", "run", "desk-test", "--simulate", "--speed", "1200"});
  REQUIRE(ran.code == kExitOk);
  const auto result = json::parse(ran.out);
  CHECK(result["state"] == "finished");
  const auto& report = result["report"];
  CHECK(report["due"] == 4 * 2 * 2 * 10);
  CHECK(report["fired"].get<int>() + report["missed"].get<int>() == report["due"].get<int>());

  const auto stored = json::parse(ws.run({"campaign", "report", "desk-test"}).out);
  CHECK(stored["report"] == report);

  const auto probes = ws.run({"export", "--table", "probes", "--format", "csv"});
  REQUIRE(probes.code == kExitOk);
  const auto lines = std::count(probes.out.begin(), probes.out.end(), '\n');
  CHECK(lines == report["fired"].get<int>() + 1);

  const auto qos = ws.run({"analyze", "--report", "qos", "--format", "csv"});
  CHECK(qos.code == kExitOk);
  const auto matrix = ws.run({"analyze", "--report", "continent-matrix", "--op", "getmap"});
  CHECK(matrix.code == kExitOk);
  const auto out_file = ws.path("errors.json");
  CHECK(ws.run({"export", "--table", "errors", "--format", "json", "--out", out_file}).code == kExitOk);
  CHECK(json::parse(std::ifstream(out_file))["report"] == "errors");
}

TEST_CASE("serve answers until SIGTERM and reports a taken port", "[cli][serve]") {
  Workspace ws;
  {
    SystemClock clock;
    Store store(ws.db(), clock);
    store.upsert_site(stored_site("eu"));
  }
  const int port = free_port();
  const std::string bind = "127.0.0.1:" + std::to_string(port);
  const pid_t server = spawn({WMSMON_CLI_PATH, "--db", ws.db(), "--quiet", "serve", "--bind", bind});
  REQUIRE(server > 0);

  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    std::this_thread::sleep_for(50ms);
    res = client.Get("/api/v1/sites");
  }
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).size() == 1);

  const pid_t second = spawn({WMSMON_CLI_PATH, "--db", ws.db(), "--quiet", "serve", "--bind", bind});
  CHECK(wait_exit(second) == kExitFailure);

  ::kill(server, SIGTERM);
  CHECK(wait_exit(server) == kExitOk);
}
