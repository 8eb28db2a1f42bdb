#include "wmsmon/api/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "wmsmon/analytics/coverage.hpp"
#include "wmsmon/analytics/histogram.hpp"
#include "wmsmon/analytics/keywords.hpp"
#include "wmsmon/analytics/powerlaw.hpp"
#include "wmsmon/analytics/qos.hpp"
#include "wmsmon/analytics/spatial.hpp"
#include "wmsmon/analytics/survey.hpp"
#include "wmsmon/core/url.hpp"
#include "wmsmon/model/json_io.hpp"

namespace wmsmon {

namespace {

using nlohmann::json;

constexpr Operation kOperations[] = {Operation::GetCapabilities, Operation::GetMap};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ReportError(ReportErrc::BadParameter, "bad " + key + ": " + text);
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v)) {
    throw ReportError(ReportErrc::BadParameter, "bad " + key + ": " + text);
  }
  return v;
}

std::optional<double> response_ms(const ProbeRecord& r) {
  if (!r.success || !r.timing) return std::nullopt;
  return static_cast<double>(r.timing->total_ms);
}

std::vector<LayerRecord> flat_layers(const Store& store) {
  std::vector<LayerRecord> out;
  for (const auto& tree : store.all_layers()) {
    CapabilitiesDoc doc;
    doc.root_layers = tree.roots;
    auto flat = flatten_layers(doc);
    std::move(flat.begin(), flat.end(), std::back_inserter(out));
  }
  return out;
}

// Per-service accumulators for one operation over the window.
std::map<std::string, QosAccumulator> accumulate(const Store& store, const ReportParams& p, Operation op) {
  std::map<std::string, QosAccumulator> out;
  store.for_each_probe(p.from, p.to, [&](const ProbeRecord& r, const std::string&) {
    if (r.operation == op) out[r.service_id].add(r);
  });
  return out;
}

// Mean successful response time per (service, site).
std::map<std::string, std::map<std::string, double>> site_means(const Store& store, const ReportParams& p) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> sums;
  store.for_each_probe(p.from, p.to, [&](const ProbeRecord& r, const std::string&) {
    if (r.operation != p.operation) return;
    if (auto ms = response_ms(r)) {
      auto& [sum, n] = sums[r.service_id][r.site_id];
      sum += *ms;
      ++n;
    }
  });
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [service, per_site] : sums) {
    for (const auto& [site, sn] : per_site) out[service][site] = sn.first / static_cast<double>(sn.second);
  }
  return out;
}

Report accessibility_report(const Store& store, const ReportParams& p) {
  Report r{"accessibility", json::object(), {{"operation", "class", "services", "share"}, {}}};
  for (auto op : kOperations) {
    std::map<AccessibilityClass, std::size_t> counts;
    const auto acc = accumulate(store, p, op);
    for (const auto& [_, a] : acc) ++counts[a.accessibility()];
    json classes = json::object();
    for (auto c : {AccessibilityClass::ConstantlyInaccessible, AccessibilityClass::TemporallyInaccessible,
                   AccessibilityClass::AlwaysAccessible}) {
      const double share = acc.empty() ? 0.0 : static_cast<double>(counts[c]) / static_cast<double>(acc.size());
      classes[std::string(to_string(c))] = {{"services", counts[c]}, {"share", share}};
      r.table.rows.push_back({to_string(op), to_string(c), counts[c], share});
    }
    r.data[std::string(to_string(op))] = {{"services", acc.size()}, {"classes", classes}};
  }
  return r;
}

Report errors_report(const Store& store, const ReportParams& p) {
  Report r{"errors",
           json::object(),
           {{"operation", "failed", "server_access", "request_processing", "server_access_share",
             "request_processing_share"},
            {}}};
  for (auto op : kOperations) {
    QosAccumulator total;
    store.for_each_probe(p.from, p.to, [&](const ProbeRecord& rec, const std::string&) {
      if (rec.operation == op) total.add(rec);
    });
    const auto failed = total.n_probes() - total.n_success();
    json sa = nullptr, rp = nullptr;
    if (failed > 0) {
      const auto shares = total.error_shares();
      sa = shares.server_access;
      rp = shares.request_processing;
    }
    r.data[std::string(to_string(op))] = {{"probes", total.n_probes()},
                                          {"failed", failed},
                                          {"server_access", total.n_server_access_errors()},
                                          {"request_processing", total.n_request_processing_errors()},
                                          {"server_access_share", sa},
                                          {"request_processing_share", rp}};
    r.table.rows.push_back({to_string(op), failed, total.n_server_access_errors(),
                            total.n_request_processing_errors(), sa, rp});
  }
  return r;
}

Report versions_report(const Store& store, const ReportParams&) {
  std::vector<std::set<WmsVersion>> support;
  for (auto& [_, versions] : store.version_support()) support.push_back(versions);
  const auto tally = version_tally(support);
  Report r{"versions", tally, {{"version", "services", "share"}, {}}};
  for (auto v : kAllWmsVersions) {
    const auto n = tally.supporting.count(v) ? tally.supporting.at(v) : 0;
    r.table.rows.push_back(
        {to_string(v), n, tally.services ? static_cast<double>(n) / static_cast<double>(tally.services) : 0.0});
  }
  return r;
}

Report crs_report(const Store& store, const ReportParams&) {
  const auto layers = flat_layers(store);
  const auto tally = crs_tally(layers);
  Report r{"crs", tally, {{"projection", "layers", "share", "sample_codes"}, {}}};
  for (const auto& ps : tally.projections) {
    std::string codes;
    for (const auto& c : ps.sample_codes) codes += (codes.empty() ? "" : " ") + c;
    r.table.rows.push_back({to_string(ps.projection), ps.layers, ps.share, codes});
  }
  r.table.rows.push_back({"ellipsoidal", tally.ellipsoidal_layers, tally.ellipsoidal_share, nullptr});
  return r;
}

Report keywords_report(const Store& store, const ReportParams& p) {
  const auto layers = flat_layers(store);
  auto counts = keyword_frequency(layers);
  if (counts.size() > p.top_n) counts.resize(p.top_n);
  Report r{"keywords", json::array(), {{"rank", "keyword", "layers"}, {}}};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    r.data.push_back({{"keyword", counts[i].keyword}, {"layers", counts[i].count}});
    r.table.rows.push_back({i + 1, counts[i].keyword, counts[i].count});
  }
  return r;
}

Report coverage_report(const Store& store, const ReportParams& p) {
  const auto layers = flat_layers(store);
  const auto grid = coverage_grid(layers, p.cell_deg);
  Report r{"coverage", grid, {{"row", "col", "south", "west", "layers"}, {}}};
  for (std::size_t row = 0; row < grid.rows; ++row) {
    for (std::size_t col = 0; col < grid.cols; ++col) {
      const auto n = grid.at(row, col);
      if (n == 0) continue;
      r.table.rows.push_back({row, col, -90.0 + static_cast<double>(row) * grid.cell_deg,
                              -180.0 + static_cast<double>(col) * grid.cell_deg, n});
    }
  }
  return r;
}

Report yearly_report(const Store& store, const ReportParams& p) {
  std::vector<ServiceLayers> services;
  for (const auto& tree : store.all_layers()) {
    CapabilitiesDoc doc;
    doc.root_layers = tree.roots;
    services.push_back({tree.service_id, flatten_layers(doc)});
  }
  const auto d = yearly_distribution(services);
  json data = d;
  data["before_year"] = p.before_year;
  data["share_latest_before"] = d.dated_services ? json(d.share_latest_before(p.before_year)) : json(nullptr);
  Report r{"yearly", data, {{"year", "layers", "services_with_latest"}, {}}};
  std::set<int> years;
  for (const auto& [y, _] : d.layer_count) years.insert(y);
  for (const auto& [y, _] : d.services_with_latest) years.insert(y);
  for (int y : years) {
    r.table.rows.push_back({y, d.layer_count.count(y) ? d.layer_count.at(y) : 0,
                            d.services_with_latest.count(y) ? d.services_with_latest.at(y) : 0});
  }
  return r;
}

Report powerlaw_report(const Store& store, const ReportParams& p) {
  Report r{"powerlaw",
           json::array(),
           {{"subject", "kind", "alpha", "xmin", "n_tail", "n_total", "ks_D", "p_value", "note"}, {}}};
  auto add = [&](const std::string& subject, const std::vector<double>& samples, PowerLawKind kind,
                 XminPolicy policy, PowerLawOptions opts) {
    try {
      const auto fit = fit_power_law(samples, kind, policy, opts);
      json j = fit;
      j["subject"] = subject;
      r.data.push_back(j);
      r.table.rows.push_back({subject, to_string(kind), fit.alpha, fit.xmin, fit.n_tail, fit.n_total, fit.ks_D,
                              fit.p_value ? json(*fit.p_value) : json(nullptr),
                              fit.truncation_note ? json(*fit.truncation_note) : json(nullptr)});
    } catch (const AnalyticsError& e) {
      r.data.push_back({{"subject", subject}, {"kind", to_string(kind)}, {"error", e.what()}});
      r.table.rows.push_back({subject, to_string(kind), nullptr, nullptr, nullptr, samples.size(), nullptr, nullptr,
                              e.what()});
    }
  };
  PowerLawOptions opts;
  opts.bootstrap_reps = p.bootstrap_reps;

  std::vector<double> per_provider;
  const auto services = store.services();
  for (const auto& [_, n] : services_per_provider(services)) per_provider.push_back(static_cast<double>(n));
  auto provider_opts = opts;
  provider_opts.min_tail = 2;
  add("services-per-provider", per_provider, PowerLawKind::Discrete, XminPolicy::fixed(1.0), provider_opts);

  for (auto op : kOperations) {
    std::vector<double> rts;
    store.for_each_probe(p.from, p.to, [&](const ProbeRecord& rec, const std::string&) {
      if (rec.operation != op) return;
      if (auto ms = response_ms(rec); ms && *ms > 0) rts.push_back(*ms);
    });
    auto rt_opts = opts;
    rt_opts.upper_cap = p.rt_cap_ms;
    add("response-time-" + std::string(to_string(op)), rts, PowerLawKind::Continuous,
        XminPolicy::ks_scan(p.xmin_candidates), rt_opts);
  }
  return r;
}

std::vector<SitePoint> site_points(const Store& store) {
  std::vector<SitePoint> out;
  for (const auto& s : store.sites()) out.push_back({s.site_id, s.location.lat, s.location.lon, s.location.continent});
  return out;
}

Report continent_report(const Store& store, const ReportParams& p) {
  const auto means = site_means(store, p);
  std::vector<ServicePoint> points;
  std::vector<ServiceSiteRt> rts;
  for (const auto& s : store.services()) {
    auto it = means.find(s.id);
    if (it == means.end()) continue;
    points.push_back({s.id, s.server_location});
    for (const auto& [site, mean] : it->second) rts.push_back({s.id, site, mean});
  }
  const auto sites = site_points(store);
  const auto analysis = closest_site_analysis(points, sites, rts);
  json data = analysis;
  data["operation"] = to_string(p.operation);
  Report r{"continent-matrix", data, {{"server_continent", "site_continent", "services", "share"}, {}}};
  for (const auto& [server, row] : analysis.continent_matrix) {
    for (const auto& [site, share] : row) {
      r.table.rows.push_back({server, site, analysis.continent_counts.at(server).at(site), share});
    }
  }
  return r;
}

Report regression_report(const Store& store, const ReportParams& p) {
  const auto means = site_means(store, p);
  std::map<std::string, MonitoringSite> sites;
  for (auto& s : store.sites()) sites.emplace(s.site_id, s);
  Report r{"regression", json::object(),
           {{"service_id", "sites", "slope_ms_per_km", "intercept_ms", "r_squared", "constant_response"}, {}}};
  json fits = json::array();
  std::size_t skipped = 0;
  double r2_sum = 0.0;
  for (const auto& s : store.services()) {
    auto it = means.find(s.id);
    if (it == means.end() || !s.server_location) {
      ++skipped;
      continue;
    }
    std::vector<SiteLatency> lat;
    for (const auto& [site, mean] : it->second) {
      if (auto st = sites.find(site); st != sites.end()) {
        lat.push_back({site, st->second.location.lat, st->second.location.lon, mean});
      }
    }
    try {
      const auto fit = distance_latency_regression(lat, s.server_location->lat, s.server_location->lon);
      json j = fit;
      j["service_id"] = s.id;
      fits.push_back(j);
      r2_sum += fit.r_squared;
      r.table.rows.push_back({s.id, fit.n, fit.slope, fit.intercept, fit.r_squared, fit.constant_response});
    } catch (const AnalyticsError&) {
      ++skipped;
    }
  }
  r.data = {{"operation", to_string(p.operation)},
            {"services_fitted", fits.size()},
            {"services_skipped", skipped},
            {"mean_r_squared", fits.empty() ? json(nullptr) : json(r2_sum / static_cast<double>(fits.size()))},
            {"fits", fits}};
  return r;
}

Report response_times_report(const Store& store, const ReportParams& p) {
  std::vector<double> rts;
  store.for_each_probe(p.from, p.to, [&](const ProbeRecord& rec, const std::string&) {
    if (rec.operation != p.operation) return;
    if (auto ms = response_ms(rec)) rts.push_back(*ms);
  });
  Report r{"response-times", nullptr, {{"lo_ms", "hi_ms", "count", "density"}, {}}};
  if (rts.empty()) {
    r.data = {{"operation", to_string(p.operation)}, {"total", 0}, {"bins", json::array()}};
    return r;
  }
  const auto h = density_histogram(rts, p.bin_width_ms, 0.0);
  r.data = h;
  r.data["operation"] = to_string(p.operation);
  for (const auto& b : h.bins) r.table.rows.push_back({b.lo, b.hi, b.count, b.density});
  return r;
}

Report qos_report(const Store& store, const ReportParams& p) {
  Report r{"qos",
           json::array(),
           {{"service_id", "operation", "probes", "successability", "accessibility_class", "rt_min_ms", "rt_avg_ms",
             "rt_max_ms"},
            {}}};
  std::map<std::pair<std::string, Operation>, QosAccumulator> acc;
  store.for_each_probe(p.from, p.to,
                       [&](const ProbeRecord& rec, const std::string&) { acc[{rec.service_id, rec.operation}].add(rec); });
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  for (const auto& [key, a] : acc) {
    const json row = {{"service_id", key.first},
                      {"operation", to_string(key.second)},
                      {"probes", a.n_probes()},
                      {"successability", a.successability()},
                      {"accessibility_class", to_string(a.accessibility())},
                      {"rt_min_ms", opt(a.rt_min_ms())},
                      {"rt_avg_ms", opt(a.rt_avg_ms())},
                      {"rt_max_ms", opt(a.rt_max_ms())}};
    r.data.push_back(row);
    std::vector<json> cells;
    for (const auto& c : r.table.columns) cells.push_back(row.at(c));
    r.table.rows.push_back(std::move(cells));
  }
  return r;
}

using Builder = Report (*)(const Store&, const ReportParams&);

const std::vector<std::pair<std::string, Builder>>& builders() {
  static const std::vector<std::pair<std::string, Builder>> b{
      {"accessibility", accessibility_report},
      {"errors", errors_report},
      {"versions", versions_report},
      {"crs", crs_report},
      {"keywords", keywords_report},
      {"coverage", coverage_report},
      {"yearly", yearly_report},
      {"powerlaw", powerlaw_report},
      {"continent-matrix", continent_report},
      {"regression", regression_report},
      {"response-times", response_times_report},
      {"qos", qos_report},
  };
  return b;
}

}  // namespace

std::optional<Operation> parse_operation_param(std::string_view text) {
  const auto t = to_lower(text);
  if (t == "getcap" || t == "getcapabilities") return Operation::GetCapabilities;
  if (t == "getmap") return Operation::GetMap;
  return operation_from_string(t);
}

ReportParams ReportParams::from_query(const std::function<std::optional<std::string>(const std::string&)>& get) {
  ReportParams p;
  auto time = [&](const char* key, Timestamp& out) {
    if (auto v = get(key)) {
      auto t = parse_time_param(*v);
      if (!t) throw ReportError(ReportErrc::BadParameter, std::string("bad ") + key + ": " + *v);
      out = *t;
    }
  };
  time("from", p.from);
  time("to", p.to);
  if (p.from > p.to) throw ReportError(ReportErrc::BadParameter, "from is after to");
  if (auto v = get("op")) {
    auto op = parse_operation_param(*v);
    if (!op) throw ReportError(ReportErrc::BadParameter, "bad op: " + *v);
    p.operation = *op;
  }
  auto positive = [](const std::string& key, double v) {
    if (!(v > 0)) throw ReportError(ReportErrc::BadParameter, key + " must be positive");
    return v;
  };
  if (auto v = get("top")) p.top_n = parse_number<std::size_t>("top", *v);
  if (auto v = get("cell")) p.cell_deg = positive("cell", parse_double("cell", *v));
  if (auto v = get("reps")) p.bootstrap_reps = parse_number<std::size_t>("reps", *v);
  if (auto v = get("cap_ms")) p.rt_cap_ms = positive("cap_ms", parse_double("cap_ms", *v));
  if (auto v = get("bin_ms")) p.bin_width_ms = positive("bin_ms", parse_double("bin_ms", *v));
  if (auto v = get("year")) p.before_year = parse_number<int>("year", *v);
  if (p.bootstrap_reps > 10'000) throw ReportError(ReportErrc::BadParameter, "reps is limited to 10000");
  return p;
}

const std::vector<std::string>& report_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : builders()) n.push_back(name);
    return n;
  }();
  return names;
}

Report build_report(const Store& store, std::string_view name, const ReportParams& params) {
  for (const auto& [n, build] : builders()) {
    if (n == name) {
      try {
        return build(store, params);
      } catch (const AnalyticsError& e) {
        if (e.kind() == AnalyticsErrc::BadInput) throw ReportError(ReportErrc::BadParameter, e.what());
        throw;
      }
    }
  }
  throw ReportError(ReportErrc::UnknownReport, "unknown report " + std::string(name));
}

nlohmann::json report_document(const Report& report, const ReportParams& params) {
  constexpr auto kMin = std::numeric_limits<std::int64_t>::min();
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  return {{"report", report.name},
          {"from", to_epoch_ms(params.from) == kMin ? json(nullptr) : json(format_iso8601(params.from))},
          {"to", to_epoch_ms(params.to) == kMax ? json(nullptr) : json(format_iso8601(params.to))},
          {"data", report.data}};
}

std::string to_csv(const Table& table) {
  auto field = [](const json& v) -> std::string {
    if (v.is_null()) return "";
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + field(table.columns[i]);
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + field(row[i]);
    out += "\r\n";
  }
  return out;
}

}  // namespace wmsmon
