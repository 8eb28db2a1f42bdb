#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "wmsmon/analytics/error.hpp"

namespace wmsmon {

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double density = 0.0;  // count / (total * bin_width)
};

struct Histogram {
  double bin_width = 0.0;
  std::size_t total = 0;
  std::vector<HistogramBin> bins;
};

/// Contiguous bins of `bin_width` starting at `origin` (default: the largest
/// multiple of the width not above the minimum). Each bin is [lo, hi).
/// Throws EmptySamples, or BadInput for a non-positive width, non-finite
/// samples or samples below the origin.
Histogram density_histogram(std::span<const double> samples, double bin_width,
                            std::optional<double> origin = std::nullopt);

void to_json(nlohmann::json& j, const Histogram& h);

}  // namespace wmsmon
