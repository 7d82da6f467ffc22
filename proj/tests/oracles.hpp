// Brute-force definitional implementations used as independent oracles.
// Everything here computes straight from the textbook definitions in long
// double, deliberately avoiding the library's code paths.
#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oracle {

inline long double mean_def(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

inline long double std_def(std::span<const double> v, bool population) {
  const long double m = mean_def(v);
  long double ss = 0.0L;
  for (double x : v) ss += (x - m) * (x - m);
  const auto n = static_cast<long double>(v.size());
  return std::sqrt(ss / (population ? n : n - 1.0L));
}

inline long double pearson_def(std::span<const double> x,
                               std::span<const double> y) {
  const long double mx = mean_def(x);
  const long double my = mean_def(y);
  long double cov = 0.0L, vx = 0.0L, vy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return cov / std::sqrt(vx * vy);
}

// O(n^2) fractional ranks: rank = (#smaller + 1) + (#equal - 1)/2.
inline std::vector<double> ranks_def(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t smaller = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++smaller;
      if (v[j] == v[i]) ++equal;
    }
    out[i] = static_cast<double>(smaller) + 1.0 +
             (static_cast<double>(equal) - 1.0) / 2.0;
  }
  return out;
}

inline long double spearman_def(std::span<const double> x,
                                std::span<const double> y) {
  const auto rx = ranks_def(x);
  const auto ry = ranks_def(y);
  return pearson_def(rx, ry);
}

struct LineFit {
  long double slope;
  long double intercept;
  long double r_squared;
};

// Normal equations on raw sums (a different algebraic route than the
// centered implementation), residual-based r^2.
inline LineFit ols_def(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<long double>(x.size());
  long double sx = 0.0L, sy = 0.0L, sxx = 0.0L, sxy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  LineFit fit{};
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  const long double my = sy / n;
  long double ss_res = 0.0L, ss_tot = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  fit.r_squared = ss_tot == 0.0L ? 0.0L : 1.0L - ss_res / ss_tot;
  return fit;
}

inline std::map<std::string, long double> normalize_def(
    const std::map<std::string, double>& counts, bool add_one,
    long double base = 2.718281828459045L) {
  std::map<std::string, long double> logs;
  for (const auto& [id, c] : counts) {
    long double v = c;
    if (add_one) v += 1.0L;
    if (v <= 0.0L) continue;
    logs[id] = std::log(v) / std::log(base);
  }
  long double lo = logs.begin()->second, hi = lo;
  for (const auto& [id, v] : logs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::map<std::string, long double> out;
  for (const auto& [id, v] : logs)
    out[id] = hi == lo ? 0.5L : (v - lo) / (hi - lo);
  return out;
}

// Deterministic random vectors for oracle-vs-implementation sweeps.
class VectorGen {
 public:
  explicit VectorGen(std::uint64_t seed) : engine_(seed) {}

  std::vector<double> uniform(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * next01();
    return v;
  }

  // Integer-valued entries produce rank ties.
  std::vector<double> with_ties(std::size_t n, int levels) {
    std::vector<double> v(n);
    for (double& x : v)
      x = static_cast<double>(engine_() % static_cast<std::uint64_t>(levels));
    return v;
  }

  std::size_t size_between(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(engine_() % (hi - lo + 1));
  }

  double next01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

inline bool close_rel(double got, long double want, double tol) {
  const long double diff = std::fabs(static_cast<long double>(got) - want);
  const long double scale =
      std::max<long double>({1.0L, std::fabs(want), std::fabs((long double)got)});
  return diff <= tol * scale;
}

}  // namespace oracle
