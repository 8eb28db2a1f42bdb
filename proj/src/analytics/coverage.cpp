#include "wmsmon/analytics/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wmsmon {

std::int64_t CoverageGrid::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

namespace {

// Cells [first, last] whose open interior meets [lo, hi] on an axis starting
// at `origin`.
std::pair<std::size_t, std::size_t> cell_span(double lo, double hi, double origin, double cell, std::size_t n) {
  const double a = (lo - origin) / cell;
  const double b = (hi - origin) / cell;
  auto first = static_cast<std::int64_t>(std::floor(a));
  auto last = static_cast<std::int64_t>(std::ceil(b)) - 1;
  if (last < first) last = first;  // zero-width: the cell holding the point
  const auto max = static_cast<std::int64_t>(n) - 1;
  first = std::clamp<std::int64_t>(first, 0, max);
  last = std::clamp<std::int64_t>(last, 0, max);
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

}  // namespace

CoverageGrid coverage_grid(std::span<const LayerRecord> layers, double cell_deg) {
  const double per_180 = 180.0 / cell_deg;
  if (!(cell_deg > 0.0) || std::abs(per_180 - std::round(per_180)) > 1e-9) {
    throw AnalyticsError(AnalyticsErrc::BadInput, "cell size must divide 180 degrees");
  }
  CoverageGrid g;
  g.cell_deg = cell_deg;
  g.rows = static_cast<std::size_t>(std::round(per_180));
  g.cols = 2 * g.rows;
  g.counts.assign(g.rows * g.cols, 0);

  for (const auto& layer : layers) {
    const auto& box = layer.geographic_bbox;
    if (!box || !box->valid() || !std::isfinite(box->west + box->east + box->south + box->north)) {
      ++g.skipped;
      continue;
    }
    std::vector<std::pair<double, double>> lon_ranges;
    if (box->crosses_antimeridian()) {
      // A piece of zero width at ±180 adds no area.
      if (box->west < 180.0) lon_ranges.emplace_back(box->west, 180.0);
      if (box->east > -180.0) lon_ranges.emplace_back(-180.0, box->east);
    } else {
      lon_ranges = {{box->west, box->east}};
    }
    const auto [r0, r1] = cell_span(box->south, box->north, -90.0, cell_deg, g.rows);
    for (const auto& [w, e] : lon_ranges) {
      const auto [c0, c1] = cell_span(w, e, -180.0, cell_deg, g.cols);
      for (auto r = r0; r <= r1; ++r) {
        for (auto c = c0; c <= c1; ++c) ++g.counts[r * g.cols + c];
      }
    }
    ++g.layers_counted;
  }
  return g;
}

void to_json(nlohmann::json& j, const CoverageGrid& g) {
  j = {{"cell_deg", g.cell_deg}, {"cols", g.cols},      {"rows", g.rows},
       {"counts", g.counts},     {"layers", g.layers_counted}, {"skipped", g.skipped}};
}

}  // namespace wmsmon
