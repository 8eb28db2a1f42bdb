#include "wmsmon/analytics/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

namespace wmsmon {

std::string_view to_string(PowerLawKind k) { return k == PowerLawKind::Discrete ? "discrete" : "continuous"; }

void to_json(nlohmann::json& j, const PowerLawFit& f) {
  j = {{"kind", to_string(f.kind)},
       {"alpha", f.alpha},
       {"xmin", f.xmin},
       {"n_tail", f.n_tail},
       {"n_total", f.n_total},
       {"ks_D", f.ks_D},
       {"p_value", f.p_value ? nlohmann::json(*f.p_value) : nlohmann::json(nullptr)},
       {"truncation_note", f.truncation_note ? nlohmann::json(*f.truncation_note) : nlohmann::json(nullptr)}};
}

double hurwitz_zeta(double s, double q) {
  // Euler-Maclaurin: direct sum of the first N terms, then the integral,
  // half-term and Bernoulli corrections at a = q + N.
  static constexpr int N = 9;
  static constexpr double kB2jOverFact[] = {
      1.0 / 12.0,
      -1.0 / 720.0,
      1.0 / 30240.0,
      -1.0 / 1209600.0,
      1.0 / 47900160.0,
      -691.0 / 1307674368000.0,
      1.0 / 74724249600.0,
      -3617.0 / 10670622842880000.0,
      43867.0 / 5109094217170944000.0,
      -174611.0 / 802857662698291200000.0,
  };
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += std::pow(q + k, -s);
  const double a = q + N;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double t = s * std::pow(a, -s - 1.0);
  for (int j = 0; j < static_cast<int>(std::size(kB2jOverFact)); ++j) {
    const double term = kB2jOverFact[j] * t;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
    t *= (s + 2 * j + 1) * (s + 2 * j + 2) / (a * a);
  }
  return sum;
}

double discrete_powerlaw_cdf(double x, double alpha, double xmin) {
  if (x < xmin) return 0.0;
  return 1.0 - hurwitz_zeta(alpha, std::floor(x) + 1.0) / hurwitz_zeta(alpha, xmin);
}

double continuous_powerlaw_cdf(double x, double alpha, double xmin) {
  if (x < xmin) return 0.0;
  return 1.0 - std::pow(x / xmin, 1.0 - alpha);
}

namespace {

constexpr double kAlphaLo = 1.0 + 1e-9;
constexpr double kAlphaHi = 30.0;
constexpr double kSamplerCeiling = 1e15;

double ks_continuous(std::span<const double> tail, double alpha, double xmin) {
  const double n = static_cast<double>(tail.size());
  double d = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double f = continuous_powerlaw_cdf(tail[i], alpha, xmin);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Both CDFs are step functions on the integers, so the sup is attained at an
// observed value or just below the next one.
double ks_discrete(std::span<const double> tail, double alpha, double xmin) {
  const double n = static_cast<double>(tail.size());
  const double z = hurwitz_zeta(alpha, xmin);
  double d = 0.0;
  double prev_emp = 0.0;
  double zeta_at = z;  // ζ(α, v) for the current distinct value v
  double v_prev = xmin;
  std::size_t i = 0;
  while (i < tail.size()) {
    const double v = tail[i];
    std::size_t j = i;
    while (j < tail.size() && tail[j] == v) ++j;
    const double gap = v - v_prev;
    if (gap > 0 && gap <= 16) {
      for (double k = v_prev; k < v; k += 1.0) zeta_at -= std::pow(k, -alpha);
    } else if (gap > 16) {
      zeta_at = hurwitz_zeta(alpha, v);
    }
    // Model CDF at v - 1 and at v.
    const double below = 1.0 - zeta_at / z;
    const double at = 1.0 - (zeta_at - std::pow(v, -alpha)) / z;
    const double emp = static_cast<double>(j) / n;
    d = std::max({d, std::abs(prev_emp - below), std::abs(emp - at)});
    prev_emp = emp;
    v_prev = v;
    i = j;
  }
  return d;
}

double alpha_continuous(std::span<const double> tail, double xmin) {
  double s = 0.0;
  for (double x : tail) s += std::log(x / xmin);
  if (s <= 0.0) throw AnalyticsError(AnalyticsErrc::DegenerateTail, "every tail sample equals xmin");
  return 1.0 + static_cast<double>(tail.size()) / s;
}

double alpha_discrete(std::span<const double> tail, double xmin) {
  double log_sum = 0.0;
  bool all_at_min = true;
  double approx_denominator = 0.0;
  for (double x : tail) {
    log_sum += std::log(x);
    approx_denominator += std::log(x / (xmin - 0.5));
    all_at_min = all_at_min && x == xmin;
  }
  if (all_at_min) throw AnalyticsError(AnalyticsErrc::DegenerateTail, "every tail sample equals xmin");
  const double n = static_cast<double>(tail.size());
  const double approx = 1.0 + n / approx_denominator;
  // Negative log-likelihood is convex in α; search a bracket around the
  // approximation, widened to the full range if the optimum lands on an edge.
  auto nll = [&](double a) { return n * std::log(hurwitz_zeta(a, xmin)) + a * log_sum; };
  auto search = [&](double lo, double hi) {
    return boost::math::tools::brent_find_minima(nll, lo, hi, std::numeric_limits<double>::digits / 2).first;
  };
  double lo = std::max(kAlphaLo, approx - 0.5);
  double hi = std::min(kAlphaHi, approx + 0.5);
  double a = search(lo, hi);
  if (a - lo < 1e-6 || hi - a < 1e-6) a = search(kAlphaLo, kAlphaHi);
  return a;
}

struct TailFit {
  double xmin;
  double alpha;
  double d;
  std::size_t tail_start;
};

TailFit fit_sorted(std::span<const double> sorted, PowerLawKind kind, const XminPolicy& policy,
                   std::size_t min_tail) {
  auto tail_from = [&](double xmin) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), xmin) - sorted.begin());
  };
  auto fit_at = [&](double xmin) {
    const auto start = tail_from(xmin);
    const auto tail = sorted.subspan(start);
    if (tail.size() < min_tail || tail.empty()) {
      throw AnalyticsError(AnalyticsErrc::TooFewSamples, "tail has " + std::to_string(tail.size()) +
                                                             " samples, need " + std::to_string(min_tail));
    }
    const double alpha = fit_alpha(kind, tail, xmin);
    return TailFit{xmin, alpha, ks_statistic(kind, tail, alpha, xmin), start};
  };
  if (policy.mode == XminPolicy::Mode::Fixed) return fit_at(policy.value);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    if (sorted.size() - i < std::max<std::size_t>(min_tail, 2)) break;
    candidates.push_back(i);
  }
  if (policy.max_candidates > 0 && candidates.size() > policy.max_candidates) {
    std::vector<std::size_t> thinned;
    const double step = static_cast<double>(candidates.size()) / static_cast<double>(policy.max_candidates);
    for (std::size_t k = 0; k < policy.max_candidates; ++k) {
      thinned.push_back(candidates[static_cast<std::size_t>(static_cast<double>(k) * step)]);
    }
    candidates = std::move(thinned);
  }
  std::optional<TailFit> best;
  std::optional<AnalyticsError> last_error;
  for (auto i : candidates) {
    try {
      auto f = fit_at(sorted[i]);
      if (!best || f.d < best->d) best = f;
    } catch (const AnalyticsError& e) {
      last_error = e;
    }
  }
  if (best) return *best;
  if (last_error) throw *last_error;
  throw AnalyticsError(AnalyticsErrc::TooFewSamples,
                       "need at least " + std::to_string(std::max<std::size_t>(min_tail, 2)) + " samples");
}

}  // namespace

double ks_statistic(PowerLawKind kind, std::span<const double> sorted_tail, double alpha, double xmin) {
  if (sorted_tail.empty()) return 0.0;
  return kind == PowerLawKind::Continuous ? ks_continuous(sorted_tail, alpha, xmin)
                                          : ks_discrete(sorted_tail, alpha, xmin);
}

double fit_alpha(PowerLawKind kind, std::span<const double> tail, double xmin) {
  return kind == PowerLawKind::Continuous ? alpha_continuous(tail, xmin) : alpha_discrete(tail, xmin);
}

DiscretePowerLawSampler::DiscretePowerLawSampler(double alpha, double xmin, std::size_t table_size)
    : alpha_(alpha), xmin_(xmin), norm_(hurwitz_zeta(alpha, xmin)) {
  cdf_.reserve(table_size);
  double acc = 0.0;
  for (std::size_t k = 0; k < table_size; ++k) {
    acc += std::pow(xmin + static_cast<double>(k), -alpha) / norm_;
    cdf_.push_back(acc);
  }
  guide_.resize(table_size);
  std::size_t idx = 0;
  for (std::size_t g = 0; g < table_size; ++g) {
    const double u = static_cast<double>(g) / static_cast<double>(table_size);
    while (idx + 1 < cdf_.size() && cdf_[idx] <= u) ++idx;
    guide_[g] = static_cast<std::uint32_t>(idx);
  }
}

double DiscretePowerLawSampler::invert(double u) const {
  if (u < cdf_.back()) {
    std::size_t idx = guide_[static_cast<std::size_t>(u * static_cast<double>(guide_.size()))];
    while (cdf_[idx] <= u) ++idx;
    return xmin_ + static_cast<double>(idx);
  }
  // Beyond the table: the smallest x with ζ(α, x + 1) < (1 - u) ζ(α, xmin),
  // found by galloping from the continuous approximation then bisecting.
  const double target = (1.0 - u) * norm_;
  const double table_end = xmin_ + static_cast<double>(cdf_.size());
  auto above = [&](double x) { return hurwitz_zeta(alpha_, x + 1.0) >= target; };
  double guess = std::floor((xmin_ - 0.5) * std::pow(1.0 - u, -1.0 / (alpha_ - 1.0)) + 0.5);
  if (!std::isfinite(guess) || guess > kSamplerCeiling) guess = kSamplerCeiling;
  double lo = table_end - 1.0;  // above(lo) holds: u lies past the table
  double hi = std::max(guess, table_end);
  while (above(hi)) {
    if (hi >= kSamplerCeiling) return kSamplerCeiling;
    lo = hi;
    hi = std::min(kSamplerCeiling, hi * 2.0);
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor((lo + hi) / 2.0);
    (above(mid) ? lo : hi) = mid;
  }
  return hi;
}

double DiscretePowerLawSampler::operator()(std::mt19937_64& rng) const {
  return invert(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

PowerLawFit fit_power_law(std::span<const double> samples, PowerLawKind kind, XminPolicy policy,
                          const PowerLawOptions& options) {
  std::vector<double> sorted;
  sorted.reserve(samples.size());
  std::size_t capped = 0;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) throw AnalyticsError(AnalyticsErrc::BadInput, "samples must be positive");
    if (kind == PowerLawKind::Discrete && x != std::floor(x)) {
      throw AnalyticsError(AnalyticsErrc::BadInput, "discrete samples must be integers");
    }
    if (options.upper_cap && x >= *options.upper_cap) {
      ++capped;
      continue;
    }
    sorted.push_back(x);
  }
  if (policy.mode == XminPolicy::Mode::Fixed && !(policy.value > 0.0)) {
    throw AnalyticsError(AnalyticsErrc::BadInput, "xmin must be positive");
  }
  std::sort(sorted.begin(), sorted.end());

  const auto best = fit_sorted(sorted, kind, policy, options.min_tail);
  PowerLawFit fit;
  fit.kind = kind;
  fit.alpha = best.alpha;
  fit.xmin = best.xmin;
  fit.n_tail = sorted.size() - best.tail_start;
  fit.n_total = sorted.size();
  fit.ks_D = best.d;
  if (options.upper_cap) {
    fit.truncation_note = "fitted below " + nlohmann::json(*options.upper_cap).dump() + "; " +
                          std::to_string(capped) + " samples at or above the cap excluded";
  }

  if (options.bootstrap_reps > 0) {
    // Semi-parametric bootstrap: the body below xmin is resampled, the tail
    // drawn from the fitted law, and each replicate refitted the same way.
    std::mt19937_64 rng(options.seed);
    const std::span<const double> body(sorted.data(), best.tail_start);
    const double p_tail = static_cast<double>(fit.n_tail) / static_cast<double>(sorted.size());
    std::optional<DiscretePowerLawSampler> discrete;
    if (kind == PowerLawKind::Discrete) discrete.emplace(fit.alpha, fit.xmin);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> rep(sorted.size());
    std::size_t at_least = 0;
    std::size_t completed = 0;
    for (std::size_t r = 0; r < options.bootstrap_reps; ++r) {
      for (auto& x : rep) {
        if (body.empty() || unit(rng) < p_tail) {
          x = discrete ? (*discrete)(rng) : fit.xmin * std::pow(1.0 - unit(rng), -1.0 / (fit.alpha - 1.0));
        } else {
          x = body[std::uniform_int_distribution<std::size_t>(0, body.size() - 1)(rng)];
        }
      }
      std::sort(rep.begin(), rep.end());
      try {
        const auto f = fit_sorted(rep, kind, policy, options.min_tail);
        ++completed;
        if (f.d >= fit.ks_D) ++at_least;
      } catch (const AnalyticsError&) {
        // A replicate too small or degenerate to fit counts as no evidence
        // either way.
      }
    }
    if (completed > 0) fit.p_value = static_cast<double>(at_least) / static_cast<double>(completed);
  }
  return fit;
}

}  // namespace wmsmon
