#pragma once

#include "wmsmon/core/error.hpp"

namespace wmsmon {

enum class AnalyticsErrc {
  EmptyWindow,
  NoFailures,
  TooFewSamples,
  DegenerateTail,
  EmptySamples,
  TooFewSites,
  ZeroVariance,
  BadInput,
};
using AnalyticsError = Error<AnalyticsErrc>;

}  // namespace wmsmon
