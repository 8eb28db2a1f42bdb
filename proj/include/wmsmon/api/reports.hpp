#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmsmon/core/error.hpp"
#include "wmsmon/probe/probe.hpp"
#include "wmsmon/store/store.hpp"

namespace wmsmon {

enum class ReportErrc { UnknownReport, BadParameter };
using ReportError = Error<ReportErrc>;

/// get_capabilities / get_map and the short forms getcap / getmap, in any
/// case.
std::optional<Operation> parse_operation_param(std::string_view text);

struct ReportParams {
  Timestamp from = from_epoch_ms(std::numeric_limits<std::int64_t>::min());
  Timestamp to = from_epoch_ms(std::numeric_limits<std::int64_t>::max());
  // Operation for the latency reports; the QoS tables cover both.
  Operation operation = Operation::GetCapabilities;
  std::size_t top_n = 50;
  double cell_deg = 1.0;
  std::size_t bootstrap_reps = 200;
  std::size_t xmin_candidates = 400;
  double rt_cap_ms = 60'000.0;
  double bin_width_ms = 100.0;
  int before_year = 2013;

  /// Reads from, to, op, top, cell, reps, cap_ms, bin_ms and year. Throws
  /// BadParameter.
  static ReportParams from_query(const std::function<std::optional<std::string>(const std::string&)>& get);
};

/// Flat rows for CSV export.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct Report {
  std::string name;
  nlohmann::json data;
  Table table;
};

/// accessibility, errors, versions, crs, keywords, coverage, yearly,
/// powerlaw, continent-matrix, regression, response-times, qos.
const std::vector<std::string>& report_names();

/// Throws UnknownReport.
Report build_report(const Store& store, std::string_view name, const ReportParams& params = {});

/// {"report": name, "from": ..., "to": ..., "data": ...}
nlohmann::json report_document(const Report& report, const ReportParams& params);

/// RFC 4180: header line, then rows; strings quoted when needed, null as
/// an empty field.
std::string to_csv(const Table& table);

}  // namespace wmsmon
