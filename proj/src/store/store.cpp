#include "wmsmon/store/store.hpp"

#include <sqlite3.h>

#include <array>

#include "wmsmon/core/url.hpp"
#include "wmsmon/model/json_io.hpp"

namespace wmsmon {

namespace {

constexpr std::array<std::pair<CampaignState, std::string_view>, 6> kStateNames{{
    {CampaignState::Created, "created"},
    {CampaignState::Running, "running"},
    {CampaignState::Paused, "paused"},
    {CampaignState::Finished, "finished"},
    {CampaignState::Stopped, "stopped"},
    {CampaignState::Failed, "failed"},
}};

constexpr const char* kSchema = R"sql(
PRAGMA foreign_keys = ON;
CREATE TABLE IF NOT EXISTS services (
  id TEXT PRIMARY KEY,
  liveness TEXT NOT NULL,
  continent TEXT NOT NULL,
  body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS capabilities (
  service_id TEXT PRIMARY KEY REFERENCES services(id),
  body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS layers (
  service_id TEXT NOT NULL REFERENCES services(id),
  ordinal INTEGER NOT NULL,
  parent INTEGER,
  name TEXT,
  body TEXT NOT NULL,
  PRIMARY KEY (service_id, ordinal)
);
CREATE TABLE IF NOT EXISTS version_support (
  service_id TEXT NOT NULL REFERENCES services(id),
  version TEXT NOT NULL,
  PRIMARY KEY (service_id, version)
);
CREATE TABLE IF NOT EXISTS sites (
  id TEXT PRIMARY KEY,
  body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS campaigns (
  id TEXT PRIMARY KEY,
  state TEXT NOT NULL,
  config TEXT NOT NULL,
  report TEXT,
  created_at INTEGER NOT NULL,
  updated_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS probes (
  service_id TEXT NOT NULL REFERENCES services(id),
  site_id TEXT NOT NULL REFERENCES sites(id),
  operation TEXT NOT NULL,
  started_at INTEGER NOT NULL,
  campaign_id TEXT REFERENCES campaigns(id),
  body TEXT NOT NULL,
  PRIMARY KEY (service_id, site_id, operation, started_at)
) WITHOUT ROWID;
CREATE INDEX IF NOT EXISTS probes_by_operation ON probes (service_id, operation, started_at);
CREATE INDEX IF NOT EXISTS probes_by_campaign ON probes (campaign_id, started_at);
CREATE TRIGGER IF NOT EXISTS probes_append_only_update BEFORE UPDATE ON probes
  BEGIN SELECT RAISE(ABORT, 'probe log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS probes_append_only_delete BEFORE DELETE ON probes
  BEGIN SELECT RAISE(ABORT, 'probe log is append-only'); END;
)sql";

[[noreturn]] void fail(sqlite3* db, const std::string& context) {
  throw StoreError(StoreErrc::Backend, context + ": " + sqlite3_errmsg(db));
}

std::string dump(const nlohmann::json& j) { return j.dump(); }

void flatten(const std::vector<LayerRecord>& layers, std::optional<std::int64_t> parent,
             std::vector<std::tuple<std::optional<std::int64_t>, const LayerRecord*>>& out) {
  for (const auto& l : layers) {
    const auto ordinal = static_cast<std::int64_t>(out.size());
    out.emplace_back(parent, &l);
    flatten(l.children, ordinal, out);
  }
}

}  // namespace

std::string_view to_string(CampaignState s) {
  for (const auto& [k, name] : kStateNames) {
    if (k == s) return name;
  }
  return "unknown";
}

std::optional<CampaignState> campaign_state_from_string(std::string_view s) {
  for (const auto& [k, name] : kStateNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const StoredCampaign& c) {
  j = {{"campaign_id", c.config.campaign_id},
       {"state", to_string(c.state)},
       {"config", c.config},
       {"report", c.report ? *c.report : nlohmann::json(nullptr)},
       {"created_at", format_iso8601(c.created_at)},
       {"updated_at", format_iso8601(c.updated_at)}};
}

/// RAII prepared statement with positional binding.
class Store::Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, std::string_view v) { return bind(i, std::string(v)); }
  Statement& bind(int i, const char* v) { return bind(i, std::string(v)); }
  Statement& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Statement& bind_null(int i) {
    sqlite3_bind_null(stmt_, i);
    return *this;
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(StoreErrc::Backend, sqlite3_errmsg(db_));
  }
  /// Runs to completion; returns the sqlite result code instead of throwing.
  int run() {
    int rc;
    while ((rc = sqlite3_step(stmt_)) == SQLITE_ROW) {
    }
    return rc == SQLITE_DONE ? SQLITE_OK : sqlite3_extended_errcode(db_);
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

Store::Store(const std::string& path, const Clock& clock) : clock_(clock) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw StoreError(StoreErrc::Backend, "cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  if (path != ":memory:") exec("PRAGMA journal_mode = WAL; PRAGMA synchronous = NORMAL;");
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StoreError(StoreErrc::Backend, msg);
  }
}

template <typename F>
auto Store::locked(F&& f) const {
  std::lock_guard lock(mu_);
  return f();
}

void Store::upsert_service(const ServiceRecord& service) {
  locked([&] {
    Statement st(db_,
                 "INSERT INTO services (id, liveness, continent, body) VALUES (?1, ?2, ?3, ?4) "
                 "ON CONFLICT(id) DO UPDATE SET liveness = ?2, continent = ?3, body = ?4");
    st.bind(1, service.id)
        .bind(2, to_string(service.liveness))
        .bind(3, to_lower(service.server_location ? service.server_location->continent : ""))
        .bind(4, dump(service));
    if (st.run() != SQLITE_OK) fail(db_, "upsert service");
  });
}

std::optional<ServiceRecord> Store::service(const std::string& id) const {
  return locked([&]() -> std::optional<ServiceRecord> {
    Statement st(db_, "SELECT body FROM services WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return nlohmann::json::parse(st.text(0)).get<ServiceRecord>();
  });
}

namespace {

std::string service_where(const ServiceQuery& q) {
  std::string where = " WHERE 1 = 1";
  if (q.liveness) where += " AND liveness = ?1";
  if (q.continent) where += " AND continent = ?2";
  return where;
}

}  // namespace

std::vector<ServiceRecord> Store::services(const ServiceQuery& query) const {
  return locked([&] {
    const auto sql = "SELECT body FROM services" + service_where(query) + " ORDER BY id LIMIT ?3 OFFSET ?4";
    Statement st(db_, sql.c_str());
    if (query.liveness) st.bind(1, to_string(*query.liveness));
    if (query.continent) st.bind(2, to_lower(*query.continent));
    const auto max = static_cast<std::size_t>(std::numeric_limits<std::int64_t>::max());
    st.bind(3, static_cast<std::int64_t>(std::min(query.limit, max)));
    st.bind(4, static_cast<std::int64_t>(std::min(query.offset, max)));
    std::vector<ServiceRecord> out;
    while (st.step()) out.push_back(nlohmann::json::parse(st.text(0)).get<ServiceRecord>());
    return out;
  });
}

std::size_t Store::count_services(const ServiceQuery& query) const {
  return locked([&] {
    const auto sql = "SELECT COUNT(*) FROM services" + service_where(query);
    Statement st(db_, sql.c_str());
    if (query.liveness) st.bind(1, to_string(*query.liveness));
    if (query.continent) st.bind(2, to_lower(*query.continent));
    st.step();
    return static_cast<std::size_t>(st.integer(0));
  });
}

void Store::put_capabilities(const std::string& service_id, const CapabilitiesDoc& doc) {
  locked([&] {
    {
      Statement exists(db_, "SELECT 1 FROM services WHERE id = ?1");
      exists.bind(1, service_id);
      if (!exists.step()) throw StoreError(StoreErrc::ReferentialViolation, "unknown service " + service_id);
    }
    exec("BEGIN IMMEDIATE");
    try {
      nlohmann::json body = doc;
      body.erase("root_layers");
      Statement caps(db_,
                     "INSERT INTO capabilities (service_id, body) VALUES (?1, ?2) "
                     "ON CONFLICT(service_id) DO UPDATE SET body = ?2");
      caps.bind(1, service_id).bind(2, dump(body));
      if (caps.run() != SQLITE_OK) fail(db_, "store capabilities");
      Statement clear(db_, "DELETE FROM layers WHERE service_id = ?1");
      clear.bind(1, service_id);
      if (clear.run() != SQLITE_OK) fail(db_, "clear layers");

      std::vector<std::tuple<std::optional<std::int64_t>, const LayerRecord*>> rows;
      flatten(doc.root_layers, std::nullopt, rows);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [parent, layer] = rows[i];
        nlohmann::json lj = *layer;
        lj.erase("children");
        Statement row(db_, "INSERT INTO layers (service_id, ordinal, parent, name, body) VALUES (?1, ?2, ?3, ?4, ?5)");
        row.bind(1, service_id).bind(2, static_cast<std::int64_t>(i));
        if (parent) row.bind(3, *parent);
        else row.bind_null(3);
        if (layer->name) row.bind(4, *layer->name);
        else row.bind_null(4);
        row.bind(5, dump(lj));
        if (row.run() != SQLITE_OK) fail(db_, "store layer");
      }
      exec("COMMIT");
    } catch (...) {
      exec("ROLLBACK");
      throw;
    }
  });
}

std::optional<CapabilitiesDoc> Store::capabilities(const std::string& service_id) const {
  auto body = locked([&]() -> std::optional<std::string> {
    Statement st(db_, "SELECT body FROM capabilities WHERE service_id = ?1");
    st.bind(1, service_id);
    if (!st.step()) return std::nullopt;
    return st.text(0);
  });
  if (!body) return std::nullopt;
  auto doc = nlohmann::json::parse(*body).get<CapabilitiesDoc>();
  doc.root_layers = layers(service_id);
  return doc;
}

namespace {

struct LayerRow {
  std::string service_id;
  std::optional<std::int64_t> parent;
  LayerRecord layer;
};

std::vector<LayerRecord> build_trees(std::vector<LayerRow>& rows, std::size_t begin, std::size_t end) {
  // Rows of one service in ordinal order; ordinals are local indices.
  std::map<std::int64_t, std::vector<std::size_t>> children;
  std::vector<std::size_t> roots;
  for (std::size_t i = begin; i < end; ++i) {
    if (rows[i].parent) children[*rows[i].parent].push_back(i - begin);
    else roots.push_back(i - begin);
  }
  std::function<LayerRecord(std::size_t)> build = [&](std::size_t local) {
    LayerRecord l = std::move(rows[begin + local].layer);
    if (auto it = children.find(static_cast<std::int64_t>(local)); it != children.end()) {
      for (auto c : it->second) l.children.push_back(build(c));
    }
    return l;
  };
  std::vector<LayerRecord> out;
  for (auto r : roots) out.push_back(build(r));
  return out;
}

}  // namespace

std::vector<LayerRecord> Store::layers(const std::string& service_id) const {
  auto rows = locked([&] {
    Statement st(db_, "SELECT parent, body FROM layers WHERE service_id = ?1 ORDER BY ordinal");
    st.bind(1, service_id);
    std::vector<LayerRow> out;
    while (st.step()) {
      out.push_back({service_id, st.is_null(0) ? std::nullopt : std::optional(st.integer(0)),
                     nlohmann::json::parse(st.text(1)).get<LayerRecord>()});
    }
    return out;
  });
  return build_trees(rows, 0, rows.size());
}

std::vector<ServiceLayerTree> Store::all_layers() const {
  auto rows = locked([&] {
    Statement st(db_, "SELECT service_id, parent, body FROM layers ORDER BY service_id, ordinal");
    std::vector<LayerRow> out;
    while (st.step()) {
      out.push_back({st.text(0), st.is_null(1) ? std::nullopt : std::optional(st.integer(1)),
                     nlohmann::json::parse(st.text(2)).get<LayerRecord>()});
    }
    return out;
  });
  std::vector<ServiceLayerTree> out;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].service_id == rows[begin].service_id) ++end;
    out.push_back({rows[begin].service_id, build_trees(rows, begin, end)});
    begin = end;
  }
  return out;
}

void Store::set_version_support(const std::string& service_id, const std::set<WmsVersion>& versions) {
  locked([&] {
    exec("BEGIN IMMEDIATE");
    try {
      Statement clear(db_, "DELETE FROM version_support WHERE service_id = ?1");
      clear.bind(1, service_id);
      if (clear.run() != SQLITE_OK) fail(db_, "clear versions");
      for (auto v : versions) {
        Statement ins(db_, "INSERT INTO version_support (service_id, version) VALUES (?1, ?2)");
        ins.bind(1, service_id).bind(2, to_string(v));
        if (const int rc = ins.run(); rc == SQLITE_CONSTRAINT_FOREIGNKEY) {
          throw StoreError(StoreErrc::ReferentialViolation, "unknown service " + service_id);
        } else if (rc != SQLITE_OK) {
          fail(db_, "store versions");
        }
      }
      exec("COMMIT");
    } catch (...) {
      exec("ROLLBACK");
      throw;
    }
  });
}

std::map<std::string, std::set<WmsVersion>> Store::version_support() const {
  return locked([&] {
    // Services without rows are included with an empty set.
    Statement st(db_,
                 "SELECT s.id, v.version FROM services s LEFT JOIN version_support v ON v.service_id = s.id "
                 "ORDER BY s.id");
    std::map<std::string, std::set<WmsVersion>> out;
    while (st.step()) {
      auto& set = out[st.text(0)];
      if (!st.is_null(1)) {
        if (auto v = wms_version_from_string(st.text(1))) set.insert(*v);
      }
    }
    return out;
  });
}

void Store::upsert_site(const MonitoringSite& site) {
  locked([&] {
    Statement st(db_, "INSERT INTO sites (id, body) VALUES (?1, ?2) ON CONFLICT(id) DO UPDATE SET body = ?2");
    st.bind(1, site.site_id).bind(2, dump(site));
    if (st.run() != SQLITE_OK) fail(db_, "upsert site");
  });
}

std::optional<MonitoringSite> Store::site(const std::string& id) const {
  return locked([&]() -> std::optional<MonitoringSite> {
    Statement st(db_, "SELECT body FROM sites WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return nlohmann::json::parse(st.text(0)).get<MonitoringSite>();
  });
}

std::vector<MonitoringSite> Store::sites() const {
  return locked([&] {
    Statement st(db_, "SELECT body FROM sites ORDER BY id");
    std::vector<MonitoringSite> out;
    while (st.step()) out.push_back(nlohmann::json::parse(st.text(0)).get<MonitoringSite>());
    return out;
  });
}

void Store::insert_campaign(const CampaignConfig& config, CampaignState state) {
  locked([&] {
    const auto now = to_epoch_ms(clock_.now());
    Statement st(db_,
                 "INSERT INTO campaigns (id, state, config, created_at, updated_at) VALUES (?1, ?2, ?3, ?4, ?4)");
    st.bind(1, config.campaign_id).bind(2, to_string(state)).bind(3, dump(config)).bind(4, now);
    if (const int rc = st.run(); rc == SQLITE_CONSTRAINT_PRIMARYKEY) {
      throw StoreError(StoreErrc::DuplicateRecord, "campaign " + config.campaign_id + " exists");
    } else if (rc != SQLITE_OK) {
      fail(db_, "insert campaign");
    }
  });
}

void Store::set_campaign_state(const std::string& id, CampaignState state) {
  locked([&] {
    Statement st(db_, "UPDATE campaigns SET state = ?2, updated_at = ?3 WHERE id = ?1");
    st.bind(1, id).bind(2, to_string(state)).bind(3, to_epoch_ms(clock_.now()));
    if (st.run() != SQLITE_OK) fail(db_, "update campaign");
    if (sqlite3_changes(db_) == 0) throw StoreError(StoreErrc::NotFound, "unknown campaign " + id);
  });
}

void Store::set_campaign_report(const std::string& id, const nlohmann::json& report) {
  locked([&] {
    Statement st(db_, "UPDATE campaigns SET report = ?2, updated_at = ?3 WHERE id = ?1");
    st.bind(1, id).bind(2, dump(report)).bind(3, to_epoch_ms(clock_.now()));
    if (st.run() != SQLITE_OK) fail(db_, "update campaign");
    if (sqlite3_changes(db_) == 0) throw StoreError(StoreErrc::NotFound, "unknown campaign " + id);
  });
}

namespace {

constexpr const char* kCampaignColumns = "SELECT state, config, report, created_at, updated_at FROM campaigns";

template <typename Row>
StoredCampaign campaign_from_row(const Row& st) {
  StoredCampaign c;
  c.state = campaign_state_from_string(st.text(0)).value_or(CampaignState::Failed);
  c.config = nlohmann::json::parse(st.text(1)).template get<CampaignConfig>();
  if (!st.is_null(2)) c.report = nlohmann::json::parse(st.text(2));
  c.created_at = from_epoch_ms(st.integer(3));
  c.updated_at = from_epoch_ms(st.integer(4));
  return c;
}

}  // namespace

std::optional<StoredCampaign> Store::campaign(const std::string& id) const {
  return locked([&]() -> std::optional<StoredCampaign> {
    const std::string sql = std::string(kCampaignColumns) + " WHERE id = ?1";
    Statement st(db_, sql.c_str());
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return campaign_from_row(st);
  });
}

std::vector<StoredCampaign> Store::campaigns() const {
  return locked([&] {
    const std::string sql = std::string(kCampaignColumns) + " ORDER BY id";
    Statement st(db_, sql.c_str());
    std::vector<StoredCampaign> out;
    while (st.step()) out.push_back(campaign_from_row(st));
    return out;
  });
}

void Store::append_probe(const ProbeRecord& record, const std::string& campaign_id) {
  if (record.started_at > clock_.now() + kClockSkewAllowance) {
    throw StoreError(StoreErrc::FutureRecord, "started_at " + format_iso8601(record.started_at) +
                                                  " is beyond the clock-skew allowance");
  }
  locked([&] {
    auto exists = [&](const char* sql, const std::string& id) {
      Statement st(db_, sql);
      st.bind(1, id);
      return st.step();
    };
    if (!exists("SELECT 1 FROM services WHERE id = ?1", record.service_id)) {
      throw StoreError(StoreErrc::ReferentialViolation, "unknown service " + record.service_id);
    }
    if (!exists("SELECT 1 FROM sites WHERE id = ?1", record.site_id)) {
      throw StoreError(StoreErrc::ReferentialViolation, "unknown site " + record.site_id);
    }
    if (!campaign_id.empty() && !exists("SELECT 1 FROM campaigns WHERE id = ?1", campaign_id)) {
      throw StoreError(StoreErrc::ReferentialViolation, "unknown campaign " + campaign_id);
    }
    Statement st(db_,
                 "INSERT INTO probes (service_id, site_id, operation, started_at, campaign_id, body) "
                 "VALUES (?1, ?2, ?3, ?4, ?5, ?6)");
    st.bind(1, record.service_id)
        .bind(2, record.site_id)
        .bind(3, to_string(record.operation))
        .bind(4, to_epoch_ms(record.started_at));
    if (campaign_id.empty()) st.bind_null(5);
    else st.bind(5, campaign_id);
    st.bind(6, dump(record));
    const int rc = st.run();
    if (rc == SQLITE_CONSTRAINT_PRIMARYKEY) {
      throw StoreError(StoreErrc::DuplicateRecord, "probe already recorded for " + record.service_id + " at " +
                                                       format_iso8601(record.started_at));
    }
    if (rc != SQLITE_OK) fail(db_, "append probe");
  });
}

std::vector<ProbeRecord> Store::query_probes(const ProbeQuery& q) const {
  if (q.from > q.to) throw StoreError(StoreErrc::BadRange, "from is after to");
  return locked([&] {
    std::string sql =
        "SELECT body FROM probes WHERE service_id = ?1 AND started_at >= ?2 AND started_at < ?3";
    if (q.operation) sql += " AND operation = ?4";
    if (q.site_id) sql += " AND site_id = ?5";
    if (q.campaign_id) sql += " AND campaign_id = ?6";
    sql += " ORDER BY started_at, site_id, operation";
    Statement st(db_, sql.c_str());
    st.bind(1, q.service_id).bind(2, to_epoch_ms(q.from)).bind(3, to_epoch_ms(q.to));
    if (q.operation) st.bind(4, to_string(*q.operation));
    if (q.site_id) st.bind(5, *q.site_id);
    if (q.campaign_id) st.bind(6, *q.campaign_id);
    std::vector<ProbeRecord> out;
    while (st.step()) out.push_back(nlohmann::json::parse(st.text(0)).get<ProbeRecord>());
    return out;
  });
}

std::vector<ProbeRecord> Store::query_probes(const std::string& service_id, Operation op, Timestamp from,
                                             Timestamp to, std::optional<std::string> site_id) const {
  ProbeQuery q;
  q.service_id = service_id;
  q.operation = op;
  q.from = from;
  q.to = to;
  q.site_id = std::move(site_id);
  return query_probes(q);
}

void Store::for_each_probe(Timestamp from, Timestamp to,
                           const std::function<void(const ProbeRecord&, const std::string&)>& fn) const {
  if (from > to) throw StoreError(StoreErrc::BadRange, "from is after to");
  // Rows are materialized first so callbacks never run under the lock.
  auto rows = locked([&] {
    Statement st(db_,
                 "SELECT body, campaign_id FROM probes WHERE started_at >= ?1 AND started_at < ?2 "
                 "ORDER BY service_id, operation, started_at, site_id");
    st.bind(1, to_epoch_ms(from)).bind(2, to_epoch_ms(to));
    std::vector<std::pair<std::string, std::string>> out;
    while (st.step()) out.emplace_back(st.text(0), st.text(1));
    return out;
  });
  for (const auto& [body, campaign] : rows) fn(nlohmann::json::parse(body).get<ProbeRecord>(), campaign);
}

std::size_t Store::probe_count() const {
  return locked([&] {
    Statement st(db_, "SELECT COUNT(*) FROM probes");
    st.step();
    return static_cast<std::size_t>(st.integer(0));
  });
}

}  // namespace wmsmon
