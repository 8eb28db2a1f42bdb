#include <catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "mock_server.hpp"
#include "wmsmon/core/clock.hpp"
#include "wmsmon/net/rate_limiter.hpp"
#include "wmsmon/net/transport.hpp"

using namespace wmsmon;
using namespace std::chrono_literals;

TEST_CASE("phases always add up to the total", "[net][timing]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> phase_us(0, 3'000'000);
  for (int i = 0; i < 5000; ++i) {
    const std::int64_t dns = phase_us(rng), conn = phase_us(rng), proc = phase_us(rng),
                       xfer = phase_us(rng);
    PhaseMarks m{dns, dns + conn, dns + conn + proc, dns + conn + proc + xfer};
    const auto t = compose_timing(m);
    REQUIRE(t.phase_sum() == t.total_ms);
    REQUIRE(t.consistent(0));
    // Each phase is the difference of two marks rounded to the millisecond,
    // so it may drift from the exact value by at most one millisecond.
    CHECK(std::abs(t.dns_ms * 1000 - dns) <= 1000);
    CHECK(std::abs(t.connect_ms * 1000 - conn) <= 1000);
    CHECK(std::abs(t.request_processing_ms * 1000 - proc) <= 1000);
    CHECK(std::abs(t.transfer_ms * 1000 - xfer) <= 1000);
  }
}

TEST_CASE("timeouts record exactly the timeout", "[net][timing]") {
  PhaseMarks m{2'000, 12'000, 0, 5'000'400};
  const auto t = compose_timing(m, 5000ms);
  CHECK(t.total_ms == 5000);
  CHECK(t.dns_ms == 2);
  CHECK(t.connect_ms == 10);
  CHECK(t.request_processing_ms == 4988);
  CHECK(t.transfer_ms == 0);

  // Stalled in DNS: everything is attributed to the lookup.
  const auto dns_stall = compose_timing({9'000'000, 0, 0, 9'000'000}, 5000ms);
  CHECK(dns_stall.dns_ms == 5000);
  CHECK(dns_stall.phase_sum() == 5000);
}

TEST_CASE("host limiter spaces requests per host", "[net][rate]") {
  ManualClock clock(from_epoch_ms(0));
  HostRateLimiter limiter(clock, 1000ms);
  CHECK(to_epoch_ms(limiter.acquire("a")) == 0);
  CHECK(to_epoch_ms(limiter.acquire("b")) == 0);
  CHECK(to_epoch_ms(limiter.acquire("a")) == 1000);
  CHECK(to_epoch_ms(clock.now()) == 1000);
  CHECK(to_epoch_ms(limiter.reserve("a", from_epoch_ms(500))) == 2000);
  CHECK(to_epoch_ms(limiter.reserve("a", from_epoch_ms(10'000))) == 10'000);
  CHECK(to_epoch_ms(limiter.reserve("a", from_epoch_ms(10'500))) == 11'000);
}

TEST_CASE("curl transport against a local server", "[net][curl]") {
  testing::MockServer mock;
  mock.server().Get("/ok", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<hello/>", "text/xml");
  });
  mock.server().Get("/missing", [](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("nope", "text/html");
  });
  mock.server().Get("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(150ms);
    res.set_content("late", "text/plain");
  });
  mock.server().Get("/hang", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(600ms);
    res.set_content("too late", "text/plain");
  });
  mock.server().Get("/redirect", [](const httplib::Request&, httplib::Response& res) {
    res.set_redirect("/ok");
  });
  mock.start();
  CurlTransport transport;

  SECTION("success") {
    const auto r = transport.fetch({mock.base_url() + "/ok"});
    REQUIRE(r.transport_ok());
    CHECK(r.status == 200);
    CHECK(r.body == "<hello/>");
    CHECK(r.content_type == "text/xml");
    CHECK(r.timing.consistent(0));
  }
  SECTION("http error is not a transport failure") {
    const auto r = transport.fetch({mock.base_url() + "/missing"});
    CHECK(r.transport_ok());
    CHECK(r.status == 404);
  }
  SECTION("server delay lands in request processing") {
    const auto r = transport.fetch({mock.base_url() + "/slow"});
    REQUIRE(r.transport_ok());
    CHECK(r.timing.request_processing_ms >= 140);
    CHECK(r.timing.consistent(0));
  }
  SECTION("timeout") {
    HttpRequest req{mock.base_url() + "/hang"};
    req.timeout = 200ms;
    const auto r = transport.fetch(req);
    CHECK(r.failure == TransportFailure::Timeout);
    CHECK(r.timing.total_ms == 200);
    CHECK(r.timing.consistent(0));
  }
  SECTION("redirects are followed") {
    const auto r = transport.fetch({mock.base_url() + "/redirect"});
    CHECK(r.status == 200);
    CHECK(r.body == "<hello/>");
  }
  SECTION("body cap") {
    HttpRequest req{mock.base_url() + "/ok"};
    req.max_body_bytes = 3;
    CHECK(transport.fetch(req).failure == TransportFailure::NetworkError);
  }
}

TEST_CASE("refused connections are connect failures", "[net][curl]") {
  int port = 0;
  {
    testing::MockServer mock;
    mock.start();
    port = mock.port();
  }
  CurlTransport transport;
  HttpRequest req{"http://127.0.0.1:" + std::to_string(port) + "/"};
  req.timeout = 2000ms;
  CHECK(transport.fetch(req).failure == TransportFailure::ConnectFailure);
}

TEST_CASE("unresolvable hosts are dns failures", "[net][curl]") {
  CurlTransport transport;
  HttpRequest req{"http://no-such-host.invalid/"};
  req.timeout = 5000ms;
  CHECK(transport.fetch(req).failure == TransportFailure::DnsFailure);
}
