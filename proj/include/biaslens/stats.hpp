#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "biaslens/types.hpp"

namespace biaslens {

enum class ZeroPolicy : std::uint8_t { Drop = 0, AddOne = 1 };
enum class StdMode : std::uint8_t { Population = 0, Sample = 1 };

inline std::string_view label(ZeroPolicy p) {
  return p == ZeroPolicy::Drop ? "drop" : "add_one";
}
inline std::string_view label(StdMode m) {
  return m == StdMode::Population ? "population" : "sample";
}

struct NormalizationParams {
  double min_log = 0.0;
  double max_log = 0.0;
  double log_base = 2.718281828459045;  // natural log by default
};

// Per-article values in [0,1] after log-min-max normalization.
// When max==min the series is degenerate and every value is 0.5.
struct NormalizedSeries {
  std::map<std::string, double> values;
  NormalizationParams params;
  bool degenerate = false;
};

struct SummaryStats {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;
  StdMode mode = StdMode::Population;
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  // Set when SS_tot == 0; r_squared is defined as 0 in that case, never NaN.
  bool constant_response = false;
};

// ---------------------------------------------------------------------------
// normalize(x) = (log x - min log x) / (max log x - min log x)
// ---------------------------------------------------------------------------

inline NormalizedSeries log_minmax_normalize(
    const std::map<std::string, double>& counts, ZeroPolicy zero_policy,
    double log_base = 2.718281828459045) {
  if (!(log_base > 1.0)) throw ConfigError("log base must be > 1");

  std::map<std::string, double> logs;
  for (const auto& [id, count] : counts) {
    double c = count;
    if (zero_policy == ZeroPolicy::AddOne) c += 1.0;
    if (c <= 0.0) {
      if (zero_policy == ZeroPolicy::Drop) continue;
      throw EmptyInputError("count for '" + id + "' is not positive after add_one");
    }
    logs.emplace(id, std::log(c) / std::log(log_base));
  }
  if (logs.empty())
    throw EmptyInputError("no positive counts remain after zero policy");

  double lo = logs.begin()->second;
  double hi = lo;
  for (const auto& [id, v] : logs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  NormalizedSeries out;
  out.params = NormalizationParams{lo, hi, log_base};
  if (hi == lo) {
    out.degenerate = true;
    for (const auto& [id, v] : logs) out.values.emplace(id, 0.5);
    return out;
  }
  const double span = hi - lo;
  for (const auto& [id, v] : logs) out.values.emplace(id, (v - lo) / span);
  return out;
}

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatchError("pearson: input lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("pearson: need at least 2 points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) throw ZeroVarianceError("x");
  if (syy == 0.0) throw ZeroVarianceError("y");
  return sxy / std::sqrt(sxx * syy);
}

// Fractional ranks, 1-based; ties get the average of their positions.
inline std::vector<double> fractional_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatchError("spearman: input lengths differ");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

// ---------------------------------------------------------------------------
// Ordinary least squares: y = slope * x + intercept
// ---------------------------------------------------------------------------

inline RegressionResult ols_fit(std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatchError("ols_fit: input lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("ols_fit: need at least 2 points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ZeroVarianceError("x");

  RegressionResult fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 0.0;
    fit.constant_response = true;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

// ---------------------------------------------------------------------------
// Mean and standard deviation
// ---------------------------------------------------------------------------

inline SummaryStats mean_and_std(std::span<const double> values, StdMode mode) {
  const std::size_t n = values.size();
  if (n == 0) throw InsufficientDataError("mean_and_std: empty input");
  if (mode == StdMode::Sample && n < 2)
    throw InsufficientDataError("mean_and_std: sample mode needs n >= 2");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);

  double m2 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
  }
  const double denom =
      mode == StdMode::Population ? static_cast<double>(n) : static_cast<double>(n - 1);
  SummaryStats s;
  s.mean = mean;
  s.std_dev = (m2 == 0.0) ? 0.0 : std::sqrt(m2 / denom);
  s.n = n;
  s.mode = mode;
  return s;
}

// Position of a value relative to the closed band mean +/- multiplier*sigma.
enum class BandPosition : std::uint8_t { Below, Inside, Above };

inline BandPosition band_position(double value, const SummaryStats& stats,
                                  double multiplier) {
  const double lo = stats.mean - multiplier * stats.std_dev;
  const double hi = stats.mean + multiplier * stats.std_dev;
  if (value > hi) return BandPosition::Above;
  if (value < lo) return BandPosition::Below;
  return BandPosition::Inside;
}

}  // namespace biaslens
