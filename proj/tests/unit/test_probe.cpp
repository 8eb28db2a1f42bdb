#include <catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "fake_transport.hpp"
#include "fixtures.hpp"
#include "mock_server.hpp"
#include "wmsmon/model/capabilities.hpp"
#include "wmsmon/probe/probe.hpp"

using namespace wmsmon;
using namespace wmsmon::testing;
using namespace std::chrono_literals;

namespace {

ServiceRecord service_at(const std::string& url) {
  ServiceRecord s;
  s.id = "svc-1";
  s.canonical_url = url;
  return s;
}

std::string query_param(const std::string& url, std::string_view key) {
  const auto q = url.find('?');
  if (q == std::string::npos) return {};
  for (const auto& p : split_query(url.substr(q + 1))) {
    if (iequals(p.key, key)) return percent_decode(p.value);
  }
  return "<absent>";
}

HttpResponse response(TransportFailure f, int status, std::string ctype, std::string body) {
  HttpResponse r;
  r.failure = f;
  r.status = status;
  r.content_type = std::move(ctype);
  r.body = std::move(body);
  return r;
}

}  // namespace

TEST_CASE("outcome truth table", "[probe][classify]") {
  // Written down before the implementation: (accessible, success, error class).
  const auto sae = ErrorClass::ServerAccessError;
  const auto rpe = ErrorClass::RequestProcessingError;
  const std::map<RawOutcome, Classification> table{
      {RawOutcome::DnsFail, {false, false, sae}},      {RawOutcome::ConnectFail, {false, false, sae}},
      {RawOutcome::Timeout, {false, false, sae}},      {RawOutcome::Non200, {true, false, rpe}},
      {RawOutcome::WrongPayload, {true, false, rpe}},  {RawOutcome::Ok, {true, true, std::nullopt}},
  };
  for (auto op : {Operation::GetCapabilities, Operation::GetMap}) {
    for (auto raw : kAllRawOutcomes) {
      INFO(to_string(raw) << " " << to_string(op));
      CHECK(classify_outcome(raw, op) == table.at(raw));
    }
  }
}

TEST_CASE("raw outcomes from responses", "[probe][classify]") {
  const auto caps = read_fixture("capabilities/wms_1_1_0_basic.xml");
  const auto ex = read_fixture("capabilities/exception_report.xml");
  using TF = TransportFailure;
  CHECK(raw_outcome(response(TF::DnsFailure, 0, "", ""), Operation::GetMap) == RawOutcome::DnsFail);
  CHECK(raw_outcome(response(TF::ConnectFailure, 0, "", ""), Operation::GetMap) == RawOutcome::ConnectFail);
  CHECK(raw_outcome(response(TF::NetworkError, 0, "", ""), Operation::GetMap) == RawOutcome::ConnectFail);
  CHECK(raw_outcome(response(TF::Timeout, 0, "", ""), Operation::GetCapabilities) == RawOutcome::Timeout);
  CHECK(raw_outcome(response(TF::None, 500, "text/xml", caps), Operation::GetCapabilities) == RawOutcome::Non200);
  CHECK(raw_outcome(response(TF::None, 200, "text/xml", caps), Operation::GetCapabilities) == RawOutcome::Ok);
  CHECK(raw_outcome(response(TF::None, 200, "text/xml", ex), Operation::GetCapabilities) ==
        RawOutcome::WrongPayload);
  CHECK(raw_outcome(response(TF::None, 200, "image/png", "\x89PNG"), Operation::GetMap) == RawOutcome::Ok);
  CHECK(raw_outcome(response(TF::None, 200, " image/jpeg; q=1", "x"), Operation::GetMap) == RawOutcome::Ok);
  CHECK(raw_outcome(response(TF::None, 200, "image/png", ""), Operation::GetMap) == RawOutcome::WrongPayload);
  CHECK(raw_outcome(response(TF::None, 200, "application/vnd.ogc.se_xml", ex), Operation::GetMap) ==
        RawOutcome::WrongPayload);
  CHECK(raw_outcome(response(TF::None, 404, "image/png", "x"), Operation::GetMap) == RawOutcome::Non200);
}

TEST_CASE("GetMap request construction", "[probe][getmap]") {
  SECTION("png preferred, first named layer, 1.3.0 axis order") {
    const auto doc = parse_capabilities(read_fixture("capabilities/wms_1_3_0_three_layers.xml"));
    const auto spec = build_getmap_spec(doc);
    CHECK(spec.layer_name == "roads");
    CHECK(spec.format == "image/png");
    CHECK(spec.width == 400);
    CHECK(spec.height == 200);
    CHECK(spec.crs == "EPSG:4326");
    // Geographic box (-10,-5,10,5) sent as lat/lon for EPSG:4326 in 1.3.0.
    CHECK(spec.bbox == std::array<double, 4>{-5, -10, 5, 10});
    const auto url = getmap_request_url("http://h/wms?map=/m/a.map&service=WMS&request=GetCapabilities", spec);
    CHECK(url ==
          "http://h/wms?map=/m/a.map&SERVICE=WMS&VERSION=1.3.0&REQUEST=GetMap&LAYERS=roads&STYLES=&CRS=EPSG:4326"
          "&BBOX=-5,-10,5,10&WIDTH=400&HEIGHT=200&FORMAT=image/png");
  }
  SECTION("jpeg only") {
    const auto doc = parse_capabilities(read_fixture("capabilities/wms_1_1_0_basic.xml"));
    const auto spec = build_getmap_spec(doc);
    CHECK(spec.format == "image/jpeg");
    CHECK(query_param(getmap_request_url("http://h/wms", spec), "SRS") != "<absent>");
  }
  SECTION("no formats") {
    auto doc = parse_capabilities(read_fixture("capabilities/wms_1_1_0_basic.xml"));
    doc.supported_formats.clear();
    CHECK_THROWS_AS(build_getmap_spec(doc), ProbeError);
  }
  SECTION("no named layer") {
    auto doc = parse_capabilities(read_fixture("capabilities/wms_1_1_0_basic.xml"));
    doc.root_layers.clear();
    CHECK_THROWS_AS(build_getmap_spec(doc), LayerError);
  }
  SECTION("1.1.1 keeps lon/lat and uses SRS") {
    const auto doc = parse_capabilities(read_fixture("capabilities/wms_1_1_1_mapserver.xml"));
    const auto spec = build_getmap_spec(doc);
    const auto& layer = first_named_layer(doc);
    REQUIRE(layer.geographic_bbox);
    if (spec.crs == "EPSG:4326") {
      CHECK(spec.bbox == std::array{layer.geographic_bbox->west, layer.geographic_bbox->south,
                                    layer.geographic_bbox->east, layer.geographic_bbox->north});
    }
    const auto url = getmap_request_url("http://h/cgi-bin/mapserv?map=x", spec);
    CHECK(query_param(url, "SRS") == spec.crs);
    CHECK(query_param(url, "CRS") == "<absent>");
    CHECK(query_param(url, "VERSION") == "1.1.1");
  }
  SECTION("1.0.0 uses WMTVER, request=map and short formats") {
    const auto doc = parse_capabilities(read_fixture("capabilities/wms_1_0_0_basic.xml"));
    const auto url = getmap_request_url("http://h/wms", build_getmap_spec(doc));
    CHECK(query_param(url, "WMTVER") == "1.0.0");
    CHECK(query_param(url, "REQUEST") == "map");
    CHECK(query_param(url, "FORMAT").find('/') == std::string::npos);
  }
  SECTION("projected CRS only") {
    CapabilitiesDoc doc;
    doc.service_version = WmsVersion::V1_3_0;
    doc.supported_formats = {"image/gif", "text/html"};
    LayerRecord layer;
    layer.name = "utm";
    layer.crs_list = {"EPSG:32633"};
    layer.bounding_boxes = {{"EPSG:32633", 300000, 5000000, 400000, 5100000}};
    layer.geographic_bbox = GeoBBox{12, 45, 13, 46};
    doc.root_layers.push_back(layer);
    auto spec = build_getmap_spec(doc);
    CHECK(spec.format == "image/gif");
    CHECK(spec.crs == "EPSG:32633");
    CHECK(spec.bbox == std::array<double, 4>{300000, 5000000, 400000, 5100000});

    doc.root_layers[0].crs_list = {"EPSG:3857"};
    doc.root_layers[0].bounding_boxes.clear();
    doc.root_layers[0].geographic_bbox = GeoBBox{-180, 0, 180, 0};
    spec = build_getmap_spec(doc);
    // Oracle: x = R * lon in radians; y(0) = 0.
    CHECK(spec.bbox[0] == Catch::Approx(-20037508.342789244));
    CHECK(spec.bbox[2] == Catch::Approx(20037508.342789244));
    CHECK(spec.bbox[1] == Catch::Approx(0).margin(1e-6));

    doc.root_layers[0].crs_list = {"CRS:84", "EPSG:3857"};
    CHECK(build_getmap_spec(doc).crs == "CRS:84");
  }
}

TEST_CASE("GetCapabilities request URLs", "[probe][getcap]") {
  CHECK(getcapabilities_request_url("http://h/wms?service=WMS") == "http://h/wms?SERVICE=WMS&REQUEST=GetCapabilities");
  const auto v = getcapabilities_request_url("http://h/wms?map=a&version=1.1.1", WmsVersion::V1_3_0);
  CHECK(v == "http://h/wms?map=a&SERVICE=WMS&REQUEST=GetCapabilities&VERSION=1.3.0");
  CHECK(query_param(getcapabilities_request_url("http://h/wms"), "VERSION") == "<absent>");
}

TEST_CASE("version negotiation rules", "[probe][versions]") {
  using V = WmsVersion;
  // Hand table: rows requested, columns declared, for a server whose lowest
  // version is 1.1.0.
  const bool expected[4][4] = {
      //         1.0.0  1.1.0  1.1.1  1.3.0
      /*1.0.0*/ {true, true, false, false},
      /*1.1.0*/ {true, true, false, false},
      /*1.1.1*/ {true, true, true, false},
      /*1.3.0*/ {true, true, true, true},
  };
  for (int r = 0; r < 4; ++r) {
    for (int d = 0; d < 4; ++d) {
      CHECK(legal_negotiation(kAllWmsVersions[r], kAllWmsVersions[d], V::V1_1_0) == expected[r][d]);
    }
  }
  CHECK_FALSE(legal_negotiation(V::V1_1_1, V::V1_3_0));
}

TEST_CASE("prober against canned transports", "[probe]") {
  ManualClock clock(from_epoch_ms(1'440'000'000'000));
  const auto caps130 = read_fixture("capabilities/wms_1_3_0_three_layers.xml");
  const auto caps111 = read_fixture("capabilities/wms_1_1_1_mapserver.xml");

  SECTION("version support: server honoring 1.1.1 and 1.3.0") {
    FakeTransport fake([&](const Url& url) {
      const auto v = query_param("?" + url.query, "VERSION");
      if (v == "1.1.1") return CannedReply{TransportFailure::None, 200, "text/xml", caps111, {}};
      return CannedReply{TransportFailure::None, 200, "text/xml", caps130, {}};
    });
    Prober prober(fake, clock);
    CHECK(prober.probe_version_support(service_at("http://h/wms"), "site-a") ==
          std::set<WmsVersion>{WmsVersion::V1_1_1, WmsVersion::V1_3_0});
    CHECK(fake.requests().size() == 4);
  }
  SECTION("server answering 1.3.0 to everything") {
    FakeTransport fake([&](const Url&) { return CannedReply{TransportFailure::None, 200, "text/xml", caps130, {}}; });
    Prober prober(fake, clock);
    const auto outcomes = prober.probe_versions(service_at("http://h/wms"), "site-a");
    REQUIRE(outcomes.size() == 4);
    for (const auto& o : outcomes) {
      CHECK(o.supported == (o.requested == WmsVersion::V1_3_0));
      // Its lowest version is 1.3.0, so the upward answers are legal too.
      CHECK(o.legal);
    }
  }
  SECTION("unreachable host") {
    FakeTransport fake([](const Url&) { return CannedReply{TransportFailure::DnsFailure, 0, "", "", {}}; });
    Prober prober(fake, clock);
    CHECK(prober.probe_version_support(service_at("http://h/wms"), "site-a").empty());
  }
  SECTION("one request per probe and strictly increasing start times") {
    FakeTransport fake([&](const Url& url) {
      if (icontains(url.query, "GetMap")) return CannedReply{TransportFailure::None, 200, "image/png", "png", {}};
      return CannedReply{TransportFailure::None, 200, "text/xml", caps130, {}};
    });
    Prober prober(fake, clock);
    const auto svc = service_at("http://h/wms");
    std::optional<CapabilitiesDoc> doc;
    Timestamp last{};
    for (int i = 0; i < 20; ++i) {
      const auto before = fake.requests().size();
      const auto r = prober.probe_getcapabilities(svc, "site-a", &doc);
      CHECK(fake.requests().size() == before + 1);
      CHECK(r.started_at > last);
      last = r.started_at;
      CHECK(r.success);
      CHECK(r.consistent());
    }
    REQUIRE(doc);
    const auto map = prober.probe_getmap(svc, build_getmap_spec(*doc), "site-a");
    CHECK(map.success);
    CHECK(map.operation == Operation::GetMap);
    CHECK(map.response_bytes == 3);
  }
  SECTION("service exceptions are request processing errors") {
    FakeTransport fake([](const Url&) {
      return CannedReply{TransportFailure::None, 200, "application/vnd.ogc.se_xml",
                         read_fixture("capabilities/exception_report.xml"), {}};
    });
    Prober prober(fake, clock);
    GetMapSpec spec;
    spec.layer_name = "gone";
    spec.format = "image/png";
    const auto r = prober.probe_getmap(service_at("http://h/wms"), spec, "site-a");
    CHECK(r.accessible);
    CHECK_FALSE(r.success);
    CHECK(r.error_class == ErrorClass::RequestProcessingError);
    CHECK(r.error_detail.starts_with("service exception"));
  }
}

TEST_CASE("prober against a live mock server", "[probe][curl]") {
  MockServer mock;
  const auto caps = read_fixture("capabilities/wms_1_3_0_three_layers.xml");
  const std::string png(9216, 'p');
  mock.server().Get("/wms", [&](const httplib::Request& req, httplib::Response& res) {
    std::this_thread::sleep_for(120ms);
    if (req.get_param_value("REQUEST") == "GetMap") {
      res.set_content(png, "image/png");
    } else {
      res.set_content(caps, "text/xml");
    }
  });
  mock.server().Get("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("<html><body>Internal error</body></html>", "text/html");
  });
  mock.server().Get("/stall", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(700ms);
    res.set_content("late", "text/plain");
  });
  mock.start();
  CurlTransport transport;
  SystemClock clock;
  Prober prober(transport, clock);

  const auto ok = prober.probe_getcapabilities(service_at(mock.base_url() + "/wms"), "site-a");
  CHECK(ok.success);
  REQUIRE(ok.timing);
  CHECK(ok.timing->total_ms >= 115);
  CHECK(ok.timing->total_ms < 1000);
  CHECK(ok.consistent());

  const auto doc = parse_capabilities(caps);
  const auto map = prober.probe_getmap(service_at(mock.base_url() + "/wms"), build_getmap_spec(doc), "site-a");
  CHECK(map.success);
  CHECK(map.response_bytes == 9216);

  const auto broken = prober.probe_getcapabilities(service_at(mock.base_url() + "/broken"), "site-a");
  CHECK(broken.accessible);
  CHECK(broken.error_class == ErrorClass::RequestProcessingError);
  CHECK(broken.http_status == 500);

  Prober impatient(transport, clock, {300ms, nullptr});
  const auto stalled = impatient.probe_getmap(service_at(mock.base_url() + "/stall"), build_getmap_spec(doc), "s");
  CHECK_FALSE(stalled.accessible);
  CHECK(stalled.error_class == ErrorClass::ServerAccessError);
  REQUIRE(stalled.timing);
  CHECK(stalled.timing->total_ms == 300);

  const int port = mock.port();
  mock.stop();
  const auto refused =
      prober.probe_getcapabilities(service_at("http://127.0.0.1:" + std::to_string(port) + "/wms"), "site-a");
  CHECK_FALSE(refused.accessible);
  CHECK(refused.error_class == ErrorClass::ServerAccessError);
}

TEST_CASE("probe records round-trip through json", "[probe][json]") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    ProbeRecord r;
    r.service_id = "svc-" + std::to_string(rng() % 100);
    r.site_id = "site-" + std::to_string(rng() % 3);
    r.operation = rng() % 2 ? Operation::GetMap : Operation::GetCapabilities;
    r.started_at = from_epoch_ms(1'400'000'000'000 + static_cast<std::int64_t>(rng() % 1'000'000'000));
    const auto c = classify_outcome(kAllRawOutcomes[rng() % 6], r.operation);
    r.accessible = c.accessible;
    r.success = c.success;
    r.error_class = c.error_class;
    TimingBreakdown t{static_cast<std::int64_t>(rng() % 50), static_cast<std::int64_t>(rng() % 90),
                      static_cast<std::int64_t>(rng() % 900), static_cast<std::int64_t>(rng() % 400), 0};
    t.total_ms = t.phase_sum();
    r.timing = t;
    r.response_bytes = static_cast<std::int64_t>(rng() % 100000);
    r.download_speed_bytes_per_s = download_speed(r.response_bytes, t);
    r.http_status = 200;
    const ProbeRecord back = nlohmann::json(r).get<ProbeRecord>();
    CHECK(nlohmann::json(back) == nlohmann::json(r));
    CHECK(back.consistent());
  }
  CHECK(download_speed(1000, {0, 0, 0, 500, 500}) == 2000.0);
  CHECK_FALSE(download_speed(1000, {0, 0, 10, 0, 10}));
}
