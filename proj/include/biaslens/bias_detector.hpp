#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biaslens/keyword_index.hpp"
#include "biaslens/log_model.hpp"
#include "biaslens/stats.hpp"
#include "biaslens/types.hpp"

namespace biaslens {

struct DetectorConfig {
  double r2_threshold = 0.5;        // fits with r^2 <= threshold are excluded
  double sigma_multiplier = 2.0;    // band half-width in standard deviations
  std::size_t min_articles_per_keyword = 3;
  StdMode std_mode = StdMode::Population;

  void validate() const {
    if (r2_threshold < 0.0 || r2_threshold > 1.0)
      throw ConfigError("r2_threshold must be in [0,1]");
    if (!(sigma_multiplier > 0.0))
      throw ConfigError("sigma_multiplier must be > 0");
    if (min_articles_per_keyword < 2)
      throw ConfigError("min_articles_per_keyword must be >= 2");
  }
};

// Normalized series per (attribute value, action), each computed over the
// full category's articles. Keyword regressions select from these series;
// renormalizing per keyword would break cross-keyword comparability.
class NormalizedStore {
 public:
  static NormalizedStore build(const Dataset& dataset, ZeroPolicy zero_policy,
                               double log_base = 2.718281828459045) {
    NormalizedStore store;
    store.zero_policy_ = zero_policy;
    for (Axis axis : {Axis::Gender, Axis::Age}) {
      for (Action action : {Action::Click, Action::Like}) {
        auto per_value = aggregate_counts(dataset, axis, action);
        for (auto& [value, counts] : per_value) {
          std::map<std::string, double> as_real;
          for (const auto& [id, c] : counts)
            as_real.emplace(id, static_cast<double>(c));
          try {
            store.series_.emplace(Key{value, action},
                                  log_minmax_normalize(as_real, zero_policy, log_base));
          } catch (const EmptyInputError&) {
            // Value entirely absent from the stream (e.g. no likes at all):
            // downstream omits this series instead of zero-filling.
          }
        }
      }
    }
    return store;
  }

  const NormalizedSeries* find(const AttributeValue& value, Action action) const {
    auto it = series_.find(Key{value, action});
    return it == series_.end() ? nullptr : &it->second;
  }
  ZeroPolicy zero_policy() const { return zero_policy_; }

 private:
  using Key = std::pair<AttributeValue, Action>;
  std::map<Key, NormalizedSeries> series_;
  ZeroPolicy zero_policy_ = ZeroPolicy::Drop;
};

// One fitted keyword/pair/action cell: y = first's normalized series,
// x = second's, restricted to the keyword's articles.
struct PairAnalysis {
  std::string keyword;
  AttributePair pair;
  Action action = Action::Click;
  std::string category;
  RegressionResult regression;
  double pearson_r = 0.0;
  std::size_t n_articles = 0;
};

enum class BiasClass : std::uint8_t {
  UpperIntercept = 0,
  LowerIntercept,
  UpperSlope,
  LowerSlope,
  Unbiased,
  ExcludedLowR2,
  ExcludedInsufficientData,
};

inline std::string_view label(BiasClass c) {
  switch (c) {
    case BiasClass::UpperIntercept: return "upper_intercept";
    case BiasClass::LowerIntercept: return "lower_intercept";
    case BiasClass::UpperSlope: return "upper_slope";
    case BiasClass::LowerSlope: return "lower_slope";
    case BiasClass::Unbiased: return "unbiased";
    case BiasClass::ExcludedLowR2: return "excluded_low_r2";
    default: return "excluded_insufficient_data";
  }
}

inline bool is_biased(BiasClass c) {
  return c == BiasClass::UpperIntercept || c == BiasClass::LowerIntercept ||
         c == BiasClass::UpperSlope || c == BiasClass::LowerSlope;
}

struct ClassificationThresholds {
  SummaryStats stats;
  double multiplier = 2.0;
  bool degenerate_spread = false;  // sigma == 0: the band collapses, all mid
};

struct ClassifiedKeyword {
  std::string keyword;
  AttributePair pair;
  Action action = Action::Click;
  std::string category;
  BiasClass bias_class = BiasClass::Unbiased;
  // Set iff bias_class is one of the four biased classes: Upper* favors
  // pair.first, Lower* favors pair.second.
  std::optional<AttributeValue> biased_toward;
  std::optional<PairAnalysis> analysis;  // absent when no fit was possible
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline PairAnalysis regress_keyword_pair(const std::string& keyword,
                                         const KeywordIndex& index,
                                         const NormalizedStore& store,
                                         const AttributePair& pair, Action action,
                                         const DetectorConfig& config,
                                         const std::string& category = "") {
  const std::set<std::string>& articles = articles_for_keyword(index, keyword);
  const NormalizedSeries* ys = store.find(pair.first, action);
  const NormalizedSeries* xs = store.find(pair.second, action);
  if (ys == nullptr || xs == nullptr)
    throw InsufficientDataError("no normalized series for pair " + pair.name());

  std::vector<double> x, y;
  x.reserve(articles.size());
  y.reserve(articles.size());
  for (const std::string& id : articles) {
    auto xit = xs->values.find(id);
    auto yit = ys->values.find(id);
    if (xit == xs->values.end() || yit == ys->values.end()) continue;
    x.push_back(xit->second);
    y.push_back(yit->second);
  }
  if (x.size() < config.min_articles_per_keyword)
    throw InsufficientDataError("keyword '" + keyword + "' has " +
                                std::to_string(x.size()) + " usable articles, needs " +
                                std::to_string(config.min_articles_per_keyword));

  PairAnalysis analysis{keyword, pair, action, category, {}, 0.0, 0};
  analysis.n_articles = x.size();
  analysis.regression = ols_fit(x, y);
  try {
    analysis.pearson_r = pearson(x, y);
  } catch (const ZeroVarianceError&) {
    analysis.pearson_r = 0.0;  // constant response; regression carries the flag
  }
  return analysis;
}

// Keeps strictly r^2 > threshold; ties at the threshold are excluded.
inline std::pair<std::vector<PairAnalysis>, std::vector<PairAnalysis>> filter_by_r2(
    std::vector<PairAnalysis> analyses, const DetectorConfig& config) {
  std::vector<PairAnalysis> kept, excluded;
  for (auto& a : analyses) {
    if (a.regression.r_squared > config.r2_threshold)
      kept.push_back(std::move(a));
    else
      excluded.push_back(std::move(a));
  }
  return {std::move(kept), std::move(excluded)};
}

struct InterceptPartition {
  std::vector<PairAnalysis> upper, lower, mid;
  ClassificationThresholds thresholds;
};

inline InterceptPartition classify_by_intercept(std::span<const PairAnalysis> kept,
                                                const DetectorConfig& config) {
  if (kept.empty())
    throw InsufficientDataError("classify_by_intercept: empty input");
  std::vector<double> intercepts;
  intercepts.reserve(kept.size());
  for (const auto& a : kept) intercepts.push_back(a.regression.intercept);

  InterceptPartition out;
  out.thresholds.stats = mean_and_std(intercepts, config.std_mode);
  out.thresholds.multiplier = config.sigma_multiplier;
  out.thresholds.degenerate_spread = out.thresholds.stats.std_dev == 0.0;
  for (const auto& a : kept) {
    switch (band_position(a.regression.intercept, out.thresholds.stats,
                          config.sigma_multiplier)) {
      case BandPosition::Above: out.upper.push_back(a); break;
      case BandPosition::Below: out.lower.push_back(a); break;
      case BandPosition::Inside: out.mid.push_back(a); break;
    }
  }
  return out;
}

struct SlopePartition {
  std::vector<PairAnalysis> upper, lower, unbiased;
  ClassificationThresholds thresholds;
};

// Band statistics come from the mid-intercept keywords only, keeping the
// slope stage uncontaminated by intercept outliers.
inline SlopePartition classify_by_slope(std::span<const PairAnalysis> mid,
                                        const DetectorConfig& config) {
  SlopePartition out;
  out.thresholds.multiplier = config.sigma_multiplier;
  if (mid.empty()) return out;

  std::vector<double> slopes;
  slopes.reserve(mid.size());
  for (const auto& a : mid) slopes.push_back(a.regression.slope);
  out.thresholds.stats = mean_and_std(slopes, config.std_mode);
  out.thresholds.degenerate_spread = out.thresholds.stats.std_dev == 0.0;
  for (const auto& a : mid) {
    switch (band_position(a.regression.slope, out.thresholds.stats,
                          config.sigma_multiplier)) {
      case BandPosition::Above: out.upper.push_back(a); break;
      case BandPosition::Below: out.lower.push_back(a); break;
      case BandPosition::Inside: out.unbiased.push_back(a); break;
    }
  }
  return out;
}

// Per-(pair, action) cell bookkeeping for reports: how many keywords were
// analyzed, kept past the gate, and where the bands sat.
struct CellReport {
  AttributePair pair;
  Action action = Action::Click;
  std::string category;
  std::size_t analyzed = 0;
  std::size_t kept = 0;
  std::size_t excluded_low_r2 = 0;
  std::size_t excluded_insufficient = 0;
  std::size_t biased = 0;
  std::optional<ClassificationThresholds> intercept_thresholds;
  std::optional<ClassificationThresholds> slope_thresholds;
};

struct DetectionResult {
  std::vector<ClassifiedKeyword> classified;
  std::vector<CellReport> cells;
};

namespace detail {

inline int class_rank(BiasClass c) { return static_cast<int>(c); }

}  // namespace detail

// Full chain per (pair, action): regress every indexed keyword, gate on r^2,
// band intercepts, then band slopes within the mid-intercept set.
inline DetectionResult detect_bias(const Dataset& dataset, const KeywordIndex& index,
                                   std::span<const AttributePair> pairs,
                                   const DetectorConfig& config,
                                   const NormalizedStore& store) {
  config.validate();
  if (dataset.catalog.empty()) throw EmptyDatasetError("dataset has no articles");

  DetectionResult result;
  std::size_t pair_order = 0;
  std::vector<std::tuple<std::size_t, ClassifiedKeyword>> rows;

  for (const AttributePair& pair : pairs) {
    for (Action action : {Action::Click, Action::Like}) {
      CellReport cell{pair, action,       dataset.category, 0, 0,
                      0,    0,      0,                std::nullopt, std::nullopt};

      std::vector<PairAnalysis> analyses;
      std::vector<ClassifiedKeyword> cell_rows;
      for (const auto& [keyword, freq] : index.keywords) {
        ++cell.analyzed;
        try {
          analyses.push_back(regress_keyword_pair(keyword, index, store, pair,
                                                  action, config, dataset.category));
        } catch (const InsufficientDataError&) {
          cell_rows.push_back(ClassifiedKeyword{
              keyword, pair, action, dataset.category,
              BiasClass::ExcludedInsufficientData, std::nullopt, std::nullopt});
          ++cell.excluded_insufficient;
        } catch (const ZeroVarianceError&) {
          // Degenerate predictor: no usable fit, cannot clear the r^2 gate.
          cell_rows.push_back(ClassifiedKeyword{
              keyword, pair, action, dataset.category, BiasClass::ExcludedLowR2,
              std::nullopt, std::nullopt});
          ++cell.excluded_low_r2;
        }
      }

      auto [kept, low_r2] = filter_by_r2(std::move(analyses), config);
      cell.kept = kept.size();
      cell.excluded_low_r2 += low_r2.size();
      for (auto& a : low_r2) {
        ClassifiedKeyword ck{a.keyword, pair,        action,
                             dataset.category, BiasClass::ExcludedLowR2,
                             std::nullopt,     std::nullopt};
        ck.analysis = std::move(a);
        cell_rows.push_back(std::move(ck));
      }

      if (!kept.empty()) {
        auto intercept_part = classify_by_intercept(kept, config);
        cell.intercept_thresholds = intercept_part.thresholds;
        auto slope_part = classify_by_slope(intercept_part.mid, config);
        if (!intercept_part.mid.empty())
          cell.slope_thresholds = slope_part.thresholds;

        auto emit = [&](std::vector<PairAnalysis>& group, BiasClass cls) {
          for (auto& a : group) {
            ClassifiedKeyword ck{a.keyword, pair, action, dataset.category, cls,
                                 std::nullopt, std::nullopt};
            if (is_biased(cls)) {
              ck.biased_toward = (cls == BiasClass::UpperIntercept ||
                                  cls == BiasClass::UpperSlope)
                                     ? pair.first
                                     : pair.second;
              ++cell.biased;
            }
            ck.analysis = std::move(a);
            cell_rows.push_back(std::move(ck));
          }
        };
        emit(intercept_part.upper, BiasClass::UpperIntercept);
        emit(intercept_part.lower, BiasClass::LowerIntercept);
        emit(slope_part.upper, BiasClass::UpperSlope);
        emit(slope_part.lower, BiasClass::LowerSlope);
        emit(slope_part.unbiased, BiasClass::Unbiased);
      }

      for (auto& ck : cell_rows)
        rows.emplace_back(pair_order, std::move(ck));
      result.cells.push_back(std::move(cell));
    }
    ++pair_order;
  }

  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const auto& [oa, ca] = a;
    const auto& [ob, cb] = b;
    if (oa != ob) return oa < ob;
    if (ca.action != cb.action) return ca.action < cb.action;
    if (ca.bias_class != cb.bias_class)
      return detail::class_rank(ca.bias_class) < detail::class_rank(cb.bias_class);
    return ca.keyword < cb.keyword;
  });
  result.classified.reserve(rows.size());
  for (auto& [order, ck] : rows) result.classified.push_back(std::move(ck));
  return result;
}

}  // namespace biaslens
