#include "wmsmon/analytics/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace wmsmon {

Histogram density_histogram(std::span<const double> samples, double bin_width, std::optional<double> origin) {
  if (samples.empty()) throw AnalyticsError(AnalyticsErrc::EmptySamples, "no samples");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw AnalyticsError(AnalyticsErrc::BadInput, "bin width must be positive");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (!std::isfinite(*lo_it) || !std::isfinite(*hi_it)) {
    throw AnalyticsError(AnalyticsErrc::BadInput, "samples must be finite");
  }
  const double start = origin.value_or(std::floor(*lo_it / bin_width) * bin_width);
  if (*lo_it < start) throw AnalyticsError(AnalyticsErrc::BadInput, "sample below histogram origin");

  const auto n_bins = static_cast<std::size_t>(std::floor((*hi_it - start) / bin_width)) + 1;
  Histogram h;
  h.bin_width = bin_width;
  h.total = samples.size();
  h.bins.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.bins[i].lo = start + static_cast<double>(i) * bin_width;
    h.bins[i].hi = start + static_cast<double>(i + 1) * bin_width;
  }
  for (double x : samples) {
    auto idx = static_cast<std::size_t>(std::floor((x - start) / bin_width));
    ++h.bins[std::min(idx, n_bins - 1)].count;
  }
  const double norm = static_cast<double>(h.total) * bin_width;
  for (auto& b : h.bins) b.density = static_cast<double>(b.count) / norm;
  return h;
}

void to_json(nlohmann::json& j, const Histogram& h) {
  j = {{"bin_width", h.bin_width}, {"total", h.total}, {"bins", nlohmann::json::array()}};
  for (const auto& b : h.bins) {
    j["bins"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"density", b.density}});
  }
}

}  // namespace wmsmon
