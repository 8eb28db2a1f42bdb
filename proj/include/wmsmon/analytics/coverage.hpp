#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "wmsmon/analytics/error.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

/// Per-cell layer counts on a regular lon/lat grid. Row 0 is the southernmost
/// band, column 0 starts at -180°.
struct CoverageGrid {
  double cell_deg = 1.0;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::vector<std::int64_t> counts;  // row-major
  std::size_t layers_counted = 0;
  std::size_t skipped = 0;  // layers without a usable bbox

  std::int64_t at(std::size_t row, std::size_t col) const { return counts[row * cols + col]; }
  std::int64_t total() const;
};

/// Every layer increments each cell its geographic bbox intersects with
/// positive area (a degenerate point or line box counts the cell holding
/// it). Boxes crossing the antimeridian are split. `cell_deg` must divide
/// 180 evenly; otherwise throws BadInput.
CoverageGrid coverage_grid(std::span<const LayerRecord> layers, double cell_deg = 1.0);

void to_json(nlohmann::json& j, const CoverageGrid& g);

}  // namespace wmsmon
