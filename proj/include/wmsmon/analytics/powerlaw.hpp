#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmsmon/analytics/error.hpp"

namespace wmsmon {

enum class PowerLawKind { Discrete, Continuous };

std::string_view to_string(PowerLawKind k);

struct XminPolicy {
  enum class Mode { Fixed, KsScan };
  Mode mode = Mode::KsScan;
  double value = 1.0;
  // Scan at most this many distinct values, evenly spaced by rank; 0 scans
  // them all.
  std::size_t max_candidates = 0;

  static XminPolicy fixed(double xmin) { return {Mode::Fixed, xmin, 0}; }
  static XminPolicy ks_scan(std::size_t max_candidates = 0) { return {Mode::KsScan, 0.0, max_candidates}; }
};

struct PowerLawOptions {
  std::size_t min_tail = 50;
  std::size_t bootstrap_reps = 1000;  // 0 skips the p-value
  std::uint64_t seed = 1;
  // Samples at or above the cap (e.g. a 60 s request timeout) are dropped
  // before fitting and noted in the result.
  std::optional<double> upper_cap;
};

struct PowerLawFit {
  PowerLawKind kind = PowerLawKind::Discrete;
  double alpha = 0.0;
  double xmin = 0.0;
  std::size_t n_tail = 0;
  std::size_t n_total = 0;
  double ks_D = 0.0;
  std::optional<double> p_value;
  std::optional<std::string> truncation_note;
};

void to_json(nlohmann::json& j, const PowerLawFit& f);

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

/// P(X ≤ x) for the discrete law p(k) = k^-α / ζ(α, xmin), k ≥ xmin.
double discrete_powerlaw_cdf(double x, double alpha, double xmin);
/// P(X ≤ x) for the continuous law with density ∝ x^-α on [xmin, ∞).
double continuous_powerlaw_cdf(double x, double alpha, double xmin);

/// Sup distance between the empirical CDF of `sorted_tail` (ascending, all
/// ≥ xmin) and the fitted model.
double ks_statistic(PowerLawKind kind, std::span<const double> sorted_tail, double alpha, double xmin);

/// Maximum-likelihood exponent for a fixed xmin. Discrete fits start from
/// 1 + n / Σ ln(x / (xmin - ½)) and refine on the exact likelihood.
double fit_alpha(PowerLawKind kind, std::span<const double> tail, double xmin);

/// Fits a power law to the tail x ≥ xmin. Throws TooFewSamples when the tail
/// is below `min_tail`, DegenerateTail when every tail sample equals xmin
/// (the likelihood has no maximum), BadInput for non-positive samples or
/// non-integer discrete samples.
PowerLawFit fit_power_law(std::span<const double> samples, PowerLawKind kind, XminPolicy policy = {},
                          const PowerLawOptions& options = {});

/// Draws from the discrete law by table inversion near xmin and by Hurwitz
/// zeta refinement of the continuous approximation further out.
class DiscretePowerLawSampler {
 public:
  DiscretePowerLawSampler(double alpha, double xmin, std::size_t table_size = 4096);
  double operator()(std::mt19937_64& rng) const;

 private:
  double invert(double u) const;

  double alpha_;
  double xmin_;
  double norm_;
  std::vector<double> cdf_;
  std::vector<std::uint32_t> guide_;
};

}  // namespace wmsmon
