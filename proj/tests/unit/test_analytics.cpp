#include <catch_amalgamated.hpp>

#include <gsl/gsl_randist.h>
#include <gsl/gsl_rng.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "powerlaw_oracle.hpp"
#include "survey_fixtures.hpp"
#include "wmsmon/analytics/coverage.hpp"
#include "wmsmon/analytics/geoip.hpp"
#include "wmsmon/analytics/histogram.hpp"
#include "wmsmon/analytics/keywords.hpp"
#include "wmsmon/analytics/powerlaw.hpp"
#include "wmsmon/analytics/qos.hpp"
#include "wmsmon/analytics/spatial.hpp"
#include "wmsmon/analytics/survey.hpp"

using namespace wmsmon;
using namespace wmsmon::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<ProbeRecord> outcomes(std::initializer_list<bool> accessible) {
  std::vector<ProbeRecord> v;
  int t = 0;
  for (bool a : accessible) v.push_back(probe_record("s", a, a, t++));
  return v;
}

LayerRecord titled(std::string title) {
  LayerRecord l;
  l.title = std::move(title);
  return l;
}

LayerRecord boxed(double w, double s, double e, double n) {
  LayerRecord l;
  l.geographic_bbox = GeoBBox{w, s, e, n};
  return l;
}

}  // namespace

TEST_CASE("successability and accessibility examples", "[analytics][qos]") {
  auto log = outcomes({true, true, true, false});
  CHECK(successability(log) == 0.75);
  std::vector<ProbeRecord> all_ok(2016, probe_record("s", true, true, 0));
  CHECK(successability(all_ok) == 1.0);
  std::vector<ProbeRecord> none(5, probe_record("s", false, false, 0));
  CHECK(successability(none) == 0.0);
  CHECK_THROWS_AS(successability(std::vector<ProbeRecord>{}), AnalyticsError);

  CHECK(classify_accessibility(outcomes({true, true, true})) == AccessibilityClass::AlwaysAccessible);
  CHECK(classify_accessibility(outcomes({false, false})) == AccessibilityClass::ConstantlyInaccessible);
  CHECK(classify_accessibility(outcomes({true, false, true})) == AccessibilityClass::TemporallyInaccessible);
  CHECK_THROWS_AS(classify_accessibility(std::vector<ProbeRecord>{}), AnalyticsError);

  // Accessibility reads the accessible flag, not success.
  auto served_errors = outcomes({true, true});
  for (auto& r : served_errors) {
    r.success = false;
    r.error_class = ErrorClass::RequestProcessingError;
  }
  CHECK(classify_accessibility(served_errors) == AccessibilityClass::AlwaysAccessible);
}

TEST_CASE("accessibility class matches the three-way rule for every vector up to length 10", "[analytics][qos]") {
  for (int len = 1; len <= 10; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::vector<ProbeRecord> log;
      int ones = 0;
      for (int i = 0; i < len; ++i) {
        const bool a = (mask >> i) & 1;
        ones += a;
        log.push_back(probe_record("s", a, a, i));
      }
      const auto expected = ones == len ? AccessibilityClass::AlwaysAccessible
                            : ones == 0 ? AccessibilityClass::ConstantlyInaccessible
                                        : AccessibilityClass::TemporallyInaccessible;
      REQUIRE(classify_accessibility(log) == expected);
    }
  }
}

TEST_CASE("error shares", "[analytics][qos]") {
  std::vector<ProbeRecord> log{probe_record("s", true, false, 0), probe_record("s", true, false, 1),
                               probe_record("s", false, false, 2), probe_record("s", true, true, 3)};
  const auto shares = error_shares(log);
  CHECK(shares.n_failed == 3);
  CHECK_THAT(shares.request_processing, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(shares.server_access, WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THROWS_AS(error_shares(outcomes({true, true})), AnalyticsError);

  const auto fixture = error_shares(error_type_fixture());
  CHECK(std::round(fixture.request_processing * 1e4) / 1e2 == 61.64);
  CHECK(std::round(fixture.server_access * 1e4) / 1e2 == 38.36);
}

TEST_CASE("streaming QoS equals a two-pass count", "[analytics][qos][property]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    std::vector<ProbeRecord> log;
    for (int i = 0; i < n; ++i) {
      const bool accessible = rng() % 4 != 0;
      const bool success = accessible && rng() % 3 != 0;
      auto r = probe_record("s", accessible, success, i);
      if (success) r.timing = TimingBreakdown{0, 0, 0, 0, static_cast<std::int64_t>(rng() % 5000)};
      log.push_back(r);
    }
    std::size_t ok = 0, failed = 0, access = 0;
    for (const auto& r : log) ok += r.success;
    for (const auto& r : log) {
      if (!r.success) {
        ++failed;
        access += r.error_class == ErrorClass::ServerAccessError;
      }
    }
    REQUIRE(successability(log) == static_cast<double>(ok) / n);
    if (failed > 0) {
      const auto s = error_shares(log);
      REQUIRE(s.server_access == static_cast<double>(access) / failed);
      REQUIRE(s.server_access + s.request_processing == Catch::Approx(1.0).epsilon(1e-15));
    }
    const auto summary = summarize_qos("s", Operation::GetCapabilities, {}, {}, log);
    if (summary.rt_avg_ms) {
      REQUIRE(*summary.rt_min_ms <= *summary.rt_avg_ms);
      REQUIRE(*summary.rt_avg_ms <= *summary.rt_max_ms);
    }
  }
}

TEST_CASE("accessibility fixture reproduces its class shares", "[analytics][qos]") {
  std::map<AccessibilityClass, int> tally;
  const auto logs = accessibility_fixture();
  for (const auto& [_, log] : logs) ++tally[classify_accessibility(log)];
  auto pct = [&](AccessibilityClass c) { return std::round(1e4 * tally[c] / double(logs.size())) / 1e2; };
  CHECK(pct(AccessibilityClass::ConstantlyInaccessible) == 27.60);
  CHECK(pct(AccessibilityClass::TemporallyInaccessible) == 13.64);
  CHECK(pct(AccessibilityClass::AlwaysAccessible) == 58.76);
}

TEST_CASE("hurwitz zeta agrees with GSL", "[analytics][powerlaw]") {
  for (double s : {1.05, 1.5, 1.792, 2.0, 2.5, 3.0, 4.5, 8.0}) {
    for (double q : {1.0, 1.5, 2.0, 7.0, 10.0, 123.0, 1e4, 1e7}) {
      CHECK_THAT(hurwitz_zeta(s, q), WithinRel(gsl_sf_hzeta(s, q), 1e-13));
    }
  }
}

TEST_CASE("continuous fit examples", "[analytics][powerlaw]") {
  const std::vector<double> e4(4, std::numbers::e);
  PowerLawOptions opts;
  opts.min_tail = 1;
  opts.bootstrap_reps = 0;
  const auto fit = fit_power_law(e4, PowerLawKind::Continuous, XminPolicy::fixed(1.0), opts);
  CHECK_THAT(fit.alpha, WithinAbs(2.0, 1e-12));
  CHECK(fit.n_tail == 4);

  const std::vector<double> same(100, 7.0);
  CHECK_THROWS_MATCHES(fit_power_law(same, PowerLawKind::Continuous, XminPolicy::ks_scan(), opts), AnalyticsError,
                       Catch::Matchers::Predicate<AnalyticsError>(
                           [](const AnalyticsError& e) { return e.kind() == AnalyticsErrc::DegenerateTail; }));
  CHECK_THROWS_AS(fit_power_law(same, PowerLawKind::Discrete, XminPolicy::ks_scan(), opts), AnalyticsError);

  const std::vector<double> few{1, 2, 3};
  CHECK_THROWS_MATCHES(fit_power_law(few, PowerLawKind::Continuous, XminPolicy::fixed(1.0)), AnalyticsError,
                       Catch::Matchers::Predicate<AnalyticsError>(
                           [](const AnalyticsError& e) { return e.kind() == AnalyticsErrc::TooFewSamples; }));
  CHECK_THROWS_AS(fit_power_law(std::vector<double>{1.5, 2}, PowerLawKind::Discrete, XminPolicy::fixed(1), opts),
                  AnalyticsError);
}

TEST_CASE("continuous exponents are recovered", "[analytics][powerlaw]") {
  for (double alpha : {1.5, 2.0, 2.5, 3.0}) {
    const auto samples = oracle_continuous_sample(alpha, 1.0, 10'000, 17);
    PowerLawOptions opts;
    opts.bootstrap_reps = 0;
    const auto fit = fit_power_law(samples, PowerLawKind::Continuous, XminPolicy::fixed(1.0), opts);
    CHECK_THAT(fit.alpha, WithinAbs(alpha, 0.05));
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    CHECK_THAT(fit.ks_D, WithinAbs(brute_force_ks_continuous(sorted, fit.alpha, 1.0), 1e-12));
  }
}

TEST_CASE("discrete KS matches an integer-by-integer sweep", "[analytics][powerlaw]") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto samples = oracle_discrete_sample(3.5, 1.0, 400, seed);
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double alpha = fit_alpha(PowerLawKind::Discrete, sorted, 1.0);
    CHECK_THAT(ks_statistic(PowerLawKind::Discrete, sorted, alpha, 1.0),
               WithinAbs(brute_force_ks_discrete(sorted, alpha, 1.0), 1e-12));
  }
}

TEST_CASE("discrete exponent recovery and bootstrap p-value", "[analytics][powerlaw]") {
  const auto samples = oracle_discrete_sample(1.792, 1.0, 10'000, 5);
  PowerLawOptions opts;
  opts.bootstrap_reps = 200;
  opts.seed = 11;
  const auto fit = fit_power_law(samples, PowerLawKind::Discrete, XminPolicy::fixed(1.0), opts);
  CHECK(fit.alpha >= 1.74);
  CHECK(fit.alpha <= 1.84);
  REQUIRE(fit.p_value);
  CHECK(*fit.p_value > 0.05);

  // Exact MLE beats its half-shift starting point on the likelihood.
  double log_sum = 0.0;
  for (double x : samples) log_sum += std::log(x);
  auto nll = [&](double a) { return samples.size() * std::log(gsl_sf_hzeta(a, 1.0)) + a * log_sum; };
  CHECK(nll(fit.alpha) <= nll(fit.alpha + 1e-3));
  CHECK(nll(fit.alpha) <= nll(fit.alpha - 1e-3));
}

TEST_CASE("library sampler matches the oracle distribution", "[analytics][powerlaw]") {
  DiscretePowerLawSampler sampler(1.792, 1.0, 256);
  std::mt19937_64 rng(4);
  std::vector<double> xs(20'000);
  for (auto& x : xs) x = sampler(rng);
  std::sort(xs.begin(), xs.end());
  // Two-sample comparison against the oracle through the model CDF.
  CHECK(brute_force_ks_discrete(xs, 1.792, 1.0) < 0.015);
  CHECK(xs.back() > 256);  // exercised the tail beyond the table
}

TEST_CASE("xmin scan finds the start of a power-law tail", "[analytics][powerlaw]") {
  // Uniform body on [1, 10) below a continuous tail from 10.
  std::mt19937_64 rng(8);
  auto tail = oracle_continuous_sample(2.5, 10.0, 3000, 9);
  std::vector<double> samples = tail;
  for (int i = 0; i < 1000; ++i) samples.push_back(std::uniform_real_distribution<double>(1.0, 10.0)(rng));
  PowerLawOptions opts;
  opts.bootstrap_reps = 20;
  const auto fit = fit_power_law(samples, PowerLawKind::Continuous, XminPolicy::ks_scan(), opts);
  CHECK_THAT(fit.xmin, WithinRel(10.0, 0.1));
  CHECK_THAT(fit.alpha, WithinAbs(2.5, 0.15));
  REQUIRE(fit.p_value);

  opts.upper_cap = 60.0;
  opts.bootstrap_reps = 0;
  const auto capped = fit_power_law(samples, PowerLawKind::Continuous, XminPolicy::fixed(10.0), opts);
  REQUIRE(capped.truncation_note);
  CHECK(capped.n_total < samples.size());
}

TEST_CASE("density histogram", "[analytics][histogram]") {
  std::vector<double> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(0.1);
  for (int i = 0; i < 90; ++i) samples.push_back(0.6 + i * 0.01);
  const auto h = density_histogram(samples, 0.5, 0.0);
  CHECK(h.bins[0].count == 10);
  CHECK(h.bins[0].density == 0.2);

  const std::vector<double> one_bin{3.05, 3.1, 3.2};
  const auto single = density_histogram(one_bin, 0.25);
  REQUIRE(single.bins.size() == 1);
  CHECK(single.bins[0].density == 4.0);
  CHECK_THROWS_AS(density_histogram(std::vector<double>{}, 1.0), AnalyticsError);
  CHECK_THROWS_AS(density_histogram(one_bin, 0.0), AnalyticsError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 500)(rng);
    std::lognormal_distribution<double> dist(0.0, 2.0);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = dist(rng);
    const double width = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
    const auto hist = density_histogram(xs, width);
    double integral = 0.0;
    std::size_t counted = 0;
    for (const auto& b : hist.bins) {
      integral += b.density * width;
      counted += b.count;
    }
    REQUIRE(counted == xs.size());
    REQUIRE_THAT(integral, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("keyword frequency", "[analytics][keywords]") {
  const std::vector<LayerRecord> two{titled("Geology Map of Region"), titled("Geology Map of Region")};
  CHECK(keyword_frequency(two) ==
        std::vector<KeywordCount>{{"geology", 2}, {"map", 2}, {"region", 2}});

  const std::vector<LayerRecord> repeated{titled("geology geology")};
  CHECK(keyword_frequency(repeated) == std::vector<KeywordCount>{{"geology", 1}});

  const std::vector<LayerRecord> verbs{titled("running fast")};
  CHECK(keyword_frequency(verbs).empty());
  CHECK(keyword_frequency({}).empty());

  // Title, abstract and keywords all count, once per layer, plurals folded.
  LayerRecord rich = titled("Soil Maps");
  rich.abstract_text = "Soil survey of the counties";
  rich.keywords = {"Soils", "county boundaries"};
  const std::vector<LayerRecord> layers{rich, titled("Roads"), titled("Road network")};
  CHECK(keyword_frequency(layers) == std::vector<KeywordCount>{{"road", 2},
                                                               {"boundary", 1},
                                                               {"county", 1},
                                                               {"map", 1},
                                                               {"network", 1},
                                                               {"soil", 1},
                                                               {"survey", 1}});

  Lexicon custom;
  custom.stop_words = parse_word_list("# comment\nthe\n");
  custom.nouns = parse_word_list("running\n");
  CHECK(keyword_frequency(verbs, custom) == std::vector<KeywordCount>{{"running", 1}});
  CHECK(Lexicon::builtin().stop_words.count("of") == 1);
  CHECK(Lexicon::builtin().nouns.count("geology") == 1);
}

TEST_CASE("coverage grid examples", "[analytics][coverage]") {
  const std::vector<LayerRecord> unit{boxed(0, 0, 1, 1)};
  const auto g = coverage_grid(unit);
  CHECK(g.total() == 1);
  CHECK(g.at(90, 180) == 1);

  const std::vector<LayerRecord> global{boxed(-180, -90, 180, 90)};
  const auto all = coverage_grid(global);
  CHECK(all.total() == 360 * 180);
  CHECK(*std::min_element(all.counts.begin(), all.counts.end()) == 1);

  const std::vector<LayerRecord> dateline{boxed(179.5, 0, -179.5, 1)};
  const auto split = coverage_grid(dateline);
  CHECK(split.total() == 2);
  CHECK(split.at(90, 359) == 1);
  CHECK(split.at(90, 0) == 1);

  std::vector<LayerRecord> junk{boxed(10, 5, 20, 1), LayerRecord{}, boxed(0, 0, 1, 1)};
  const auto skipped = coverage_grid(junk);
  CHECK(skipped.skipped == 2);
  CHECK(skipped.layers_counted == 1);
  CHECK(coverage_grid(unit, 5.0).cols == 72);
  CHECK_THROWS_AS(coverage_grid(unit, 7.0), AnalyticsError);
}

TEST_CASE("coverage grid equals a point-sampling oracle", "[analytics][coverage][property]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lon(-180, 180), lat(-90, 90), size(0.05, 6.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<LayerRecord> layers;
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int i = 0; i < n; ++i) {
      const double w = lon(rng), s = lat(rng);
      double e = w + size(rng);
      if (e > 180) e -= 360;  // wraps across the antimeridian
      const double north = std::min(90.0, s + size(rng));
      layers.push_back(boxed(w, s, e, north));
    }
    const auto grid = coverage_grid(layers, 1.0);
    // Oracle: sample a dense lattice inside each box and mark hit cells.
    std::vector<std::int64_t> expected(grid.counts.size(), 0);
    for (const auto& l : layers) {
      const auto& b = *l.geographic_bbox;
      const double width = b.east >= b.west ? b.east - b.west : b.east + 360 - b.west;
      std::set<std::size_t> hit;
      // Interior lattice plus points just inside each edge, so thin slivers
      // of edge cells are still hit.
      const int steps = 400;
      auto at = [](int i, double lo, double extent) {
        if (i == 0) return lo + 1e-9;
        if (i == steps + 1) return lo + extent - 1e-9;
        return lo + (i - 0.5) * extent / steps;
      };
      for (int a = 0; a <= steps + 1; ++a) {
        for (int c = 0; c <= steps + 1; ++c) {
          double x = at(a, b.west, width);
          if (x >= 180) x -= 360;
          const double y = at(c, b.south, b.north - b.south);
          const auto col = static_cast<std::size_t>(std::floor(x + 180));
          const auto row = static_cast<std::size_t>(std::min(179.0, std::floor(y + 90)));
          hit.insert(row * 360 + col);
        }
      }
      for (auto cell : hit) ++expected[cell];
    }
    REQUIRE(grid.counts == expected);
  }
}

TEST_CASE("yearly distribution", "[analytics][survey]") {
  LayerRecord a = titled("Survey 2000");
  LayerRecord b = titled("Survey 2006");
  std::vector<ServiceLayers> one{{"s1", {a, b}}, {"s2", {titled("Roads")}}};
  const auto d = yearly_distribution(one);
  CHECK(d.layer_count == std::map<int, std::size_t>{{2000, 1}, {2006, 1}});
  CHECK(d.services_with_latest == std::map<int, std::size_t>{{2006, 1}});
  CHECK(d.dated_services == 1);

  const auto fixture = yearly_distribution(yearly_fixture());
  CHECK(fixture.dated_services == 4587);
  CHECK(std::round(fixture.share_latest_before(2013) * 1e4) / 1e2 == 89.91);
}

TEST_CASE("CRS tally", "[analytics][survey]") {
  CHECK(normalize_crs(" epsg:3857 ") == "EPSG:3857");
  CHECK(normalize_crs("urn:ogc:def:crs:EPSG::4326") == "EPSG:4326");
  CHECK(normalize_crs("urn:ogc:def:crs:OGC:1.3:CRS84") == "CRS:84");
  CHECK(normalize_crs("http://www.opengis.net/gml/srs/epsg.xml#26919") == "EPSG:26919");
  CHECK(projection_of("EPSG:102100") == Projection::WebMercator);
  CHECK(projection_of("EPSG:32633") == Projection::UniversalTransverseMercator);
  CHECK(projection_of("EPSG:3031") == Projection::AntarcticStereographic);
  CHECK(projection_of("EPSG:3005") == Projection::Albers);
  CHECK(projection_of("EPSG:4326") == Projection::Other);
  CHECK(is_ellipsoidal_crs("CRS:84"));
  CHECK_FALSE(is_ellipsoidal_crs("EPSG:3857"));

  std::vector<LayerRecord> layers(4);
  layers[0].crs_list = {"EPSG:4326", "EPSG:3857", "EPSG:900913"};
  layers[1].crs_list = {"EPSG:3857", "EPSG:32633"};
  layers[2].crs_list = {"CRS:84"};
  // layers[3] declares nothing and is outside the denominator.
  const auto t = crs_tally(layers);
  CHECK(t.layers_with_crs == 3);
  CHECK(t.ellipsoidal_layers == 2);
  REQUIRE(t.projections.size() == 2);
  CHECK(t.projections[0].projection == Projection::WebMercator);
  CHECK(t.projections[0].layers == 2);
  CHECK_THAT(t.projections[0].share, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(t.projections[0].sample_codes.front() == "EPSG:3857");
}

TEST_CASE("version tally and provider helpers", "[analytics][survey]") {
  const std::vector<std::set<WmsVersion>> support{{WmsVersion::V1_1_1, WmsVersion::V1_3_0},
                                                  {WmsVersion::V1_3_0},
                                                  {}};
  const auto v = version_tally(support);
  CHECK(v.services == 3);
  CHECK(v.supporting.at(WmsVersion::V1_3_0) == 2);
  CHECK(v.supporting.at(WmsVersion::V1_0_0) == 0);

  CHECK(classify_provider_type("U.S. Geological Survey") == ProviderType::Government);
  CHECK(classify_provider_type("", "http://maps.ngdc.noaa.gov/wms") == ProviderType::Government);
  CHECK(classify_provider_type("Earth Data Analysis Center, University of New Mexico") == ProviderType::Academic);
  CHECK(classify_provider_type("Food and Agriculture Organization of the United Nations") ==
        ProviderType::Intergovernmental);
  CHECK(classify_provider_type("Esri Inc") == ProviderType::Industry);
  CHECK(classify_provider_type("The Nature Conservancy") == ProviderType::Nonprofit);
  CHECK(classify_provider_type("") == ProviderType::Unknown);

  std::vector<ServiceRecord> services(4);
  services[0].provider_name = "USGS";
  services[1].provider_name = " usgs ";
  services[2].provider_name = "NOAA";
  const auto counts = services_per_provider(services);
  CHECK(counts == std::map<std::string, std::size_t>{{"noaa", 1}, {"usgs", 2}});
}

TEST_CASE("haversine", "[analytics][spatial]") {
  CHECK(haversine_km(12.5, 40.1, 12.5, 40.1) == 0.0);
  CHECK_THAT(haversine_km(0, 0, 0, 90), WithinAbs(10007.54, 0.01));
  CHECK_THAT(haversine_km(0, 0, 0, 90), WithinAbs(std::numbers::pi / 2 * 6371.0, 1e-9));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    const double a = lat(rng), b = lon(rng), c = lat(rng), d = lon(rng);
    REQUIRE(haversine_km(a, b, c, d) == Catch::Approx(haversine_km(c, d, a, b)).epsilon(1e-12));
    REQUIRE(haversine_km(a, b, c, d) <= std::numbers::pi * 6371.0 + 1e-9);
  }
}

TEST_CASE("distance-latency regression", "[analytics][spatial]") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto exact = linear_fit(x, y);
  CHECK_THAT(exact.slope, WithinAbs(2.0, 1e-12));
  CHECK_THAT(exact.intercept, WithinAbs(1.0, 1e-12));
  CHECK_THAT(exact.r_squared, WithinAbs(1.0, 1e-12));

  const std::vector<double> flat{5, 5, 5, 5};
  const auto constant = linear_fit(x, flat);
  CHECK(constant.constant_response);
  CHECK(constant.r_squared == 0.0);
  CHECK_THROWS_AS(linear_fit(flat, y), AnalyticsError);

  std::vector<SiteLatency> two{{"a", 0, 0, 1}, {"b", 1, 1, 2}};
  CHECK_THROWS_AS(distance_latency_regression(two, 0, 0), AnalyticsError);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::uniform_real_distribution<double> lat(-60, 70), lon(-180, 180);
  std::vector<SiteLatency> sites;
  for (int i = 0; i < 30; ++i) {
    SiteLatency s{"s" + std::to_string(i), lat(rng), lon(rng), 0.0};
    s.rt_avg_ms = 50 + 0.5 * haversine_km(s.lat, s.lon, 40, -100) + noise(rng);
    sites.push_back(s);
  }
  const auto fit = distance_latency_regression(sites, 40, -100);
  CHECK_THAT(fit.slope, WithinAbs(0.5, 0.01));
  CHECK(fit.r_squared > 0.9);

  // R² is unchanged by rescaling or shifting distance; slope scales inversely.
  std::vector<double> d, rt;
  for (const auto& s : sites) {
    d.push_back(haversine_km(s.lat, s.lon, 40, -100));
    rt.push_back(s.rt_avg_ms);
  }
  for (double k : {0.001, 1.609, 42.0}) {
    std::vector<double> scaled;
    for (double v : d) scaled.push_back(k * v + 17.0);
    const auto f2 = linear_fit(scaled, rt);
    CHECK_THAT(f2.r_squared, WithinRel(fit.r_squared, 1e-10));
    CHECK_THAT(f2.slope, WithinRel(fit.slope / k, 1e-10));
  }
}

TEST_CASE("closest-site analysis", "[analytics][spatial]") {
  const std::vector<SitePoint> sites{{"near", 50, 0, "Europe"}, {"far", -30, 150, "Oceania"}};
  const std::vector<ServicePoint> one{{"svc", GeoLocation{51, 1, "GB", "Europe"}}};
  const std::vector<ServiceSiteRt> rts{{"svc", "near", 80}, {"svc", "far", 600}};
  const auto r = closest_site_analysis(one, sites, rts);
  CHECK(r.fraction == 1.0);
  CHECK(r.continent_matrix.at("Europe").at("Europe") == 1.0);

  const std::vector<ServicePoint> missing{{"x", std::nullopt}};
  CHECK(closest_site_analysis(missing, sites, rts).skipped_missing_geolocation == 1);

  // Synthetic world with RT proportional to distance.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lat(-60, 70), lon(-180, 180);
  const std::vector<SitePoint> fleet{{"s-na", 39, -77, "North America"}, {"s-eu", 50, 8, "Europe"},
                                     {"s-as", 35, 139, "Asia"},          {"s-sa", -23, -46, "South America"},
                                     {"s-oc", -33, 151, "Oceania"}};
  auto continent_of = [&](double la, double lo) {
    std::string best;
    double bd = 1e18;
    for (const auto& s : fleet) {
      const double dd = haversine_km(la, lo, s.lat, s.lon);
      if (dd < bd) {
        bd = dd;
        best = s.continent;
      }
    }
    return best;
  };
  std::vector<ServicePoint> world;
  std::vector<ServiceSiteRt> world_rts;
  for (int i = 0; i < 500; ++i) {
    const double la = lat(rng), lo = lon(rng);
    const auto id = "w" + std::to_string(i);
    world.push_back({id, GeoLocation{la, lo, "", continent_of(la, lo)}});
    for (const auto& s : fleet) world_rts.push_back({id, s.site_id, 0.02 * haversine_km(la, lo, s.lat, s.lon)});
  }
  const auto wr = closest_site_analysis(world, fleet, world_rts);
  CHECK(wr.fraction == 1.0);
  for (const auto& [server, row] : wr.continent_matrix) {
    double sum = 0.0;
    for (const auto& [_, share] : row) sum += share;
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
    for (const auto& [site, share] : row) {
      if (site != server) CHECK(share < row.at(server));
    }
  }

  // The fraction depends only on the order of response times.
  for (auto transform : {+[](double v) { return std::log1p(v); }, +[](double v) { return v * v * v + 3; },
                         +[](double v) { return std::sqrt(v) * 1000; }}) {
    auto noisy = world_rts;
    std::mt19937_64 nrng(1);
    for (auto& x : noisy) x.rt_avg_ms = transform(x.rt_avg_ms * std::uniform_real_distribution<double>(0.5, 1.5)(nrng));
    auto base = world_rts;
    std::mt19937_64 brng(1);
    for (auto& x : base) x.rt_avg_ms = x.rt_avg_ms * std::uniform_real_distribution<double>(0.5, 1.5)(brng);
    CHECK(closest_site_analysis(world, fleet, noisy).fraction == closest_site_analysis(world, fleet, base).fraction);
  }

  // Ties go to the lowest site id.
  const std::vector<ServiceSiteRt> tie{{"svc", "near", 100}, {"svc", "far", 100}};
  CHECK(closest_site_analysis(one, sites, tie).continent_counts.at("Europe").count("Oceania") == 1);
}

TEST_CASE("continent fixture reproduces its table", "[analytics][spatial]") {
  const auto w = continent_fixture();
  const auto r = closest_site_analysis(w.services, w.sites, w.rts);
  auto pct = [](double share) { return std::round(share * 1e4) / 1e2; };
  const auto& europe = r.continent_matrix.at("Europe");
  CHECK(pct(europe.at("North America")) == 3.59);
  CHECK(pct(europe.at("Europe")) == 95.10);
  CHECK(pct(europe.at("Asia")) == 0.65);
  CHECK(pct(europe.at("South America")) == 0.65);
  // Read by monitoring continent: European sites were fastest for 3.04% of
  // North American servers.
  CHECK(pct(r.continent_matrix.at("North America").at("Europe")) == 3.04);
  CHECK(pct(r.continent_matrix.at("South America").at("North America")) == 60.00);
  CHECK(pct(r.continent_matrix.at("Oceania").at("Asia")) == 96.00);
}

TEST_CASE("diurnal series", "[analytics][spatial]") {
  const auto day = *parse_iso8601("2015-08-23T00:00:00Z");
  std::vector<TimedValue> flat;
  for (int i = 0; i < 288 * 3; ++i) flat.push_back({day + std::chrono::minutes(5 * i), 200.0});
  const auto f = diurnal_series(flat, -75.0);
  CHECK(f.utc_offset_hours == -5);
  CHECK(f.peak_hours.empty());

  // Local 9:00-11:00 spikes for a server at UTC-5.
  std::vector<TimedValue> spiky;
  for (int i = 0; i < 288 * 3; ++i) {
    const auto at = day + std::chrono::minutes(5 * i);
    const auto local_hour = ((ms_of_day(at) / 3'600'000) - 5 + 24) % 24;
    spiky.push_back({at, local_hour >= 9 && local_hour < 11 ? 900.0 : 200.0});
  }
  const auto s = diurnal_series(spiky, -75.0);
  CHECK(s.peak_hours == std::vector<int>{9, 10});
  CHECK(s.peaks == std::vector<PeakWindow>{{9, 11}});

  std::vector<TimedValue> shifted;
  for (const auto& r : spiky) shifted.push_back({r.at + std::chrono::hours(5), r.value});
  DiurnalOptions opt;
  opt.utc_offset_hours = -10;
  const auto s2 = diurnal_series(shifted, 0.0, opt);
  for (std::size_t h = 0; h < 24; ++h) {
    CHECK(s2.hours[h].n == s.hours[h].n);
    CHECK(s2.hours[h].mean == s.hours[h].mean);
  }

  // A run across midnight is one window.
  std::vector<TimedValue> night;
  for (int i = 0; i < 288; ++i) {
    const auto at = day + std::chrono::minutes(5 * i);
    const auto h = ms_of_day(at) / 3'600'000;
    night.push_back({at, h >= 23 || h < 2 ? 1000.0 : 100.0});
  }
  DiurnalOptions utc;
  utc.utc_offset_hours = 0;
  CHECK(diurnal_series(night, 0.0, utc).peaks == std::vector<PeakWindow>{{23, 2}});
}

TEST_CASE("GeoIP table", "[analytics][geoip]") {
  std::istringstream csv(
      "ip_start,ip_end,lat,lon,country,continent\n"
      "# comment\n"
      "10.0.0.0,10.0.0.255,40.0,-100.0,US,North America\n"
      "3232235520,3232235775,51.5,-0.1,GB,Europe\n");
  const auto table = GeoIpTable::load_csv(csv);
  CHECK(table.size() == 2);
  CHECK(table.lookup("10.0.0.17")->country == "US");
  CHECK(table.lookup("192.168.0.1")->continent == "Europe");
  CHECK_FALSE(table.lookup("10.0.1.0"));
  CHECK_FALSE(table.lookup("not an ip"));
  CHECK(parse_ipv4("1.2.3.4") == 0x01020304u);
  CHECK_FALSE(parse_ipv4("1.2.3"));
  CHECK_FALSE(parse_ipv4("1.2.3.4.5"));
  CHECK_FALSE(parse_ipv4("256.1.1.1"));

  std::istringstream overlap("1.0.0.0,1.0.0.9,0,0,A,X\n1.0.0.5,1.0.0.20,0,0,B,X\n");
  CHECK_THROWS_AS(GeoIpTable::load_csv(overlap), AnalyticsError);
  CHECK(resolve_ipv4("localhost") == std::optional<std::string>("127.0.0.1"));
}
