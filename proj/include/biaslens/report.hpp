#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biaslens/bias_detector.hpp"
#include "biaslens/csv.hpp"
#include "biaslens/keyword_index.hpp"
#include "biaslens/log_model.hpp"
#include "biaslens/rng.hpp"
#include "biaslens/stats.hpp"
#include "biaslens/version.hpp"

namespace biaslens {

// ---------------------------------------------------------------------------
// Logging (BIASLENS_LOG_LEVEL: error|warn|info|debug, default warn)
// ---------------------------------------------------------------------------

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("BIASLENS_LOG_LEVEL");
    if (env == nullptr) return LogLevel::Warn;
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[biaslens:" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::filesystem::path events_path;
  std::filesystem::path articles_path;
  std::optional<std::filesystem::path> stopwords_path;
  std::vector<std::string> categories;
  std::uint64_t min_clicks = 100;
  std::size_t top_keywords = 100;
  DetectorConfig detector;
  ZeroPolicy zero_policy = ZeroPolicy::Drop;
  bool dedup_users = false;
  std::filesystem::path output_dir;
  bool emit_csv = true;
  bool emit_json = true;
};

// ---------------------------------------------------------------------------
// Bundle
// ---------------------------------------------------------------------------

struct CorrelationCell {
  std::optional<double> pearson_normalized;
  std::size_t n_normalized = 0;
  std::optional<double> spearman_raw;
  std::size_t n_raw = 0;
};

struct ScatterRow {
  std::string article_id;
  double x = 0.0;
  double y = 0.0;
};

struct CategoryResults {
  std::string category;
  std::size_t article_count = 0;
  ActionRatioTable ratios;
  // keyed by (index into bundle pairs, action)
  std::map<std::pair<std::size_t, Action>, CorrelationCell> correlations;
  std::map<std::pair<std::size_t, Action>, std::vector<ScatterRow>> scatter;
  DetectionResult detection;
  BuildReport build_report;
};

struct ReportBundle {
  std::vector<AttributePair> pairs;
  std::vector<CategoryResults> per_category;
  nlohmann::ordered_json manifest;
};

// ---------------------------------------------------------------------------
// Classified keyword serialization (machine surface)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json classified_to_json(const ClassifiedKeyword& ck) {
  nlohmann::ordered_json j;
  j["keyword"] = ck.keyword;
  j["axis"] = std::string(label(ck.pair.axis()));
  j["pair"] = ck.pair.name();
  j["y"] = std::string(label(ck.pair.first));
  j["x"] = std::string(label(ck.pair.second));
  j["action"] = std::string(label(ck.action));
  j["category"] = ck.category;
  j["bias_class"] = std::string(label(ck.bias_class));
  if (ck.biased_toward) j["biased_toward"] = std::string(label(*ck.biased_toward));
  if (ck.analysis) {
    j["slope"] = ck.analysis->regression.slope;
    j["intercept"] = ck.analysis->regression.intercept;
    j["r_squared"] = ck.analysis->regression.r_squared;
    j["pearson_r"] = ck.analysis->pearson_r;
    j["n_articles"] = ck.analysis->n_articles;
  }
  return j;
}

inline std::vector<ClassifiedKeyword> classified_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ConfigError("classified keywords: expected a JSON array");
  std::vector<ClassifiedKeyword> out;
  for (const auto& j : arr) {
    auto y = attribute_value_from_labels(j.at("axis").get<std::string>(),
                                         j.at("y").get<std::string>());
    auto x = attribute_value_from_labels(j.at("axis").get<std::string>(),
                                         j.at("x").get<std::string>());
    if (!y || !x) throw ConfigError("classified keywords: unknown pair values");
    ClassifiedKeyword ck{j.at("keyword").get<std::string>(),
                         AttributePair{*y, *x},
                         Action::Click,
                         {},
                         BiasClass::Unbiased,
                         std::nullopt,
                         std::nullopt};
    const auto action = action_from_label(j.at("action").get<std::string>());
    if (!action) throw ConfigError("classified keywords: unknown action");
    ck.action = *action;
    ck.category = j.value("category", std::string());
    const std::string cls = j.at("bias_class").get<std::string>();
    bool found = false;
    for (int c = 0; c <= static_cast<int>(BiasClass::ExcludedInsufficientData); ++c) {
      if (cls == label(static_cast<BiasClass>(c))) {
        ck.bias_class = static_cast<BiasClass>(c);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("classified keywords: unknown bias class '" + cls + "'");
    if (j.contains("biased_toward")) {
      auto toward = attribute_value_from_labels(
          j.at("axis").get<std::string>(), j.at("biased_toward").get<std::string>());
      if (!toward) throw ConfigError("classified keywords: unknown biased_toward");
      ck.biased_toward = *toward;
    }
    if (j.contains("slope")) {
      PairAnalysis a{ck.keyword, ck.pair, ck.action, ck.category, {}, 0.0, 0};
      a.regression.slope = j.at("slope").get<double>();
      a.regression.intercept = j.at("intercept").get<double>();
      a.regression.r_squared = j.at("r_squared").get<double>();
      a.regression.n = j.value("n_articles", std::size_t{0});
      a.pearson_r = j.value("pearson_r", 0.0);
      a.n_articles = j.value("n_articles", std::size_t{0});
      ck.analysis = std::move(a);
    }
    out.push_back(std::move(ck));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundle computation
// ---------------------------------------------------------------------------

namespace detail {

struct LoadedFile {
  std::string bytes;
  std::uint64_t digest = 0;
};

inline LoadedFile load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  LoadedFile f{buf.str(), 0};
  f.digest = fnv1a64(f.bytes.data(), f.bytes.size());
  return f;
}

inline InputFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? InputFormat::Csv : InputFormat::Jsonl;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline ReportBundle compute_bundle(const AnalyzeOptions& opts) {
  if (opts.categories.empty()) throw ConfigError("no category requested");
  opts.detector.validate();

  const auto events_file = detail::load_file(opts.events_path);
  const auto articles_file = detail::load_file(opts.articles_path);

  std::istringstream events_in(events_file.bytes);
  EventParseResult events =
      parse_events(events_in, detail::format_for(opts.events_path));
  std::istringstream articles_in(articles_file.bytes);
  ArticleParseResult articles =
      parse_articles(articles_in, detail::format_for(opts.articles_path));

  for (const ParseIssue& issue : events.issues)
    log_message(LogLevel::Warn, "events line " + std::to_string(issue.line) + ": " +
                                    std::string(label(issue.kind)) + ": " + issue.message);
  for (const ParseIssue& issue : articles.issues)
    log_message(LogLevel::Warn, "articles line " + std::to_string(issue.line) + ": " +
                                    std::string(label(issue.kind)) + ": " + issue.message);

  StopwordList stopwords;
  std::optional<detail::LoadedFile> stopwords_file;
  if (opts.stopwords_path) {
    stopwords_file = detail::load_file(*opts.stopwords_path);
    std::istringstream stop_in(stopwords_file->bytes);
    stopwords = StopwordList::from_stream(stop_in);
  }

  ReportBundle bundle;
  bundle.pairs = canonical_pairs();

  nlohmann::ordered_json category_manifest;
  for (const std::string& category : opts.categories) {
    BuildResult built = build_dataset(events.events, articles.articles, category,
                                      opts.min_clicks, opts.dedup_users);
    const Dataset& dataset = built.dataset;
    if (built.report.like_exceeds_click_cells > 0)
      log_message(LogLevel::Warn,
                  category + ": " + std::to_string(built.report.like_exceeds_click_cells) +
                      " attribute cells have more likes than clicks");

    CategoryResults results;
    results.category = category;
    results.article_count = dataset.catalog.size();
    results.build_report = built.report;
    results.ratios = action_ratio_table(dataset);

    const NormalizedStore store = NormalizedStore::build(dataset, opts.zero_policy);

    for (std::size_t p = 0; p < bundle.pairs.size(); ++p) {
      const AttributePair& pair = bundle.pairs[p];
      for (Action action : {Action::Click, Action::Like}) {
        CorrelationCell cell;

        const NormalizedSeries* ys = store.find(pair.first, action);
        const NormalizedSeries* xs = store.find(pair.second, action);
        if (ys != nullptr && xs != nullptr) {
          std::vector<ScatterRow> rows;
          std::vector<double> x, y;
          for (const auto& [id, xv] : xs->values) {
            auto yit = ys->values.find(id);
            if (yit == ys->values.end()) continue;
            rows.push_back({id, xv, yit->second});
            x.push_back(xv);
            y.push_back(yit->second);
          }
          cell.n_normalized = x.size();
          if (x.size() >= 2) {
            try {
              cell.pearson_normalized = pearson(x, y);
            } catch (const ZeroVarianceError& e) {
              log_message(LogLevel::Info, category + " " + pair.name() + " " +
                                              std::string(label(action)) +
                                              ": pearson skipped, " + e.what());
            }
          }
          if (!rows.empty())
            results.scatter.emplace(std::make_pair(p, action), std::move(rows));
        }

        // Rank correlation on raw counts over the full retained article set.
        auto per_value = aggregate_counts(dataset, pair.axis(), action);
        const auto& ymap = per_value.at(pair.first);
        const auto& xmap = per_value.at(pair.second);
        std::vector<double> raw_x, raw_y;
        raw_x.reserve(xmap.size());
        for (const auto& [id, c] : xmap) raw_x.push_back(static_cast<double>(c));
        for (const auto& [id, c] : ymap) raw_y.push_back(static_cast<double>(c));
        cell.n_raw = raw_x.size();
        if (raw_x.size() >= 2) {
          try {
            cell.spearman_raw = spearman(raw_x, raw_y);
          } catch (const ZeroVarianceError& e) {
            log_message(LogLevel::Info, category + " " + pair.name() + " " +
                                            std::string(label(action)) +
                                            ": spearman skipped, " + e.what());
          }
        }
        if (cell.pearson_normalized || cell.spearman_raw)
          results.correlations.emplace(std::make_pair(p, action), cell);
      }
    }

    const KeywordIndex index = select_keywords(dataset.catalog, default_tokenizer,
                                               stopwords, opts.top_keywords);
    log_message(LogLevel::Info, category + ": " + std::to_string(dataset.catalog.size()) +
                                    " articles, " + std::to_string(index.keywords.size()) +
                                    " keywords");
    results.detection = detect_bias(dataset, index, bundle.pairs, opts.detector, store);

    nlohmann::ordered_json cat_info;
    cat_info["articles"] = results.article_count;
    cat_info["keywords"] = index.keywords.size();
    cat_info["unknown_article_events"] = built.report.unknown_article_events;
    cat_info["deduplicated_events"] = built.report.deduplicated_events;
    cat_info["like_exceeds_click_cells"] = built.report.like_exceeds_click_cells;
    category_manifest[category] = std::move(cat_info);

    bundle.per_category.push_back(std::move(results));
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  {
    nlohmann::ordered_json cfg;
    cfg["events"] = opts.events_path.string();
    cfg["articles"] = opts.articles_path.string();
    cfg["categories"] = opts.categories;
    cfg["min_clicks"] = opts.min_clicks;
    cfg["top_keywords"] = opts.top_keywords;
    cfg["r2_threshold"] = opts.detector.r2_threshold;
    cfg["sigma_multiplier"] = opts.detector.sigma_multiplier;
    cfg["min_articles_per_keyword"] = opts.detector.min_articles_per_keyword;
    cfg["std_mode"] = std::string(label(opts.detector.std_mode));
    cfg["zero_policy"] = std::string(label(opts.zero_policy));
    cfg["dedup_users"] = opts.dedup_users;
    cfg["stopwords"] =
        opts.stopwords_path ? opts.stopwords_path->string() : std::string();
    std::vector<std::string> formats;
    if (opts.emit_csv) formats.push_back("csv");
    if (opts.emit_json) formats.push_back("json");
    cfg["formats"] = formats;
    manifest["config"] = std::move(cfg);
  }
  {
    nlohmann::ordered_json inputs;
    nlohmann::ordered_json ev;
    ev["path"] = opts.events_path.string();
    ev["bytes"] = events_file.bytes.size();
    ev["fnv1a64"] = detail::hex64(events_file.digest);
    inputs["events"] = std::move(ev);
    nlohmann::ordered_json ar;
    ar["path"] = opts.articles_path.string();
    ar["bytes"] = articles_file.bytes.size();
    ar["fnv1a64"] = detail::hex64(articles_file.digest);
    inputs["articles"] = std::move(ar);
    if (stopwords_file) {
      nlohmann::ordered_json sw;
      sw["path"] = opts.stopwords_path->string();
      sw["bytes"] = stopwords_file->bytes.size();
      sw["fnv1a64"] = detail::hex64(stopwords_file->digest);
      inputs["stopwords"] = std::move(sw);
    }
    manifest["inputs"] = std::move(inputs);
  }
  {
    nlohmann::ordered_json parse;
    parse["event_lines"] = events.lines_read;
    parse["event_records"] = events.events.size();
    parse["event_errors"] = events.issues.size();
    parse["article_lines"] = articles.lines_read;
    parse["article_records"] = articles.articles.size();
    parse["article_errors"] = articles.issues.size();
    manifest["parse"] = std::move(parse);
  }
  manifest["categories"] = std::move(category_manifest);
  bundle.manifest = std::move(manifest);
  return bundle;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace detail {

class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path root) : root_(std::move(root)) {}

  void write(const std::filesystem::path& rel, const std::string& content) {
    const auto full = root_ / rel;
    std::filesystem::create_directories(full.parent_path());
    std::ofstream os(full, std::ios::binary);
    if (!os) throw Error("cannot write output file: " + full.string());
    os << content;
    if (!os) throw Error("write failed: " + full.string());
    written_.push_back(full);
  }

  // Removes everything this writer produced (failure cleanup).
  void rollback() {
    for (const auto& path : written_) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
    written_.clear();
  }

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path root_;
  std::vector<std::filesystem::path> written_;
};

inline std::string column_name(Action action, const std::string& category) {
  return std::string(label(action)) + "_" + category;
}

}  // namespace detail

inline void emit_action_ratio_tables(const ReportBundle& bundle,
                                     const AnalyzeOptions& opts,
                                     detail::OutputWriter& writer) {
  std::vector<std::string> header = {"metric", "axis", "value"};
  for (const auto& cat : bundle.per_category) header.push_back(cat.category);

  std::ostringstream os;
  csv::write_row(os, header);
  {
    std::vector<std::string> row = {"number_of_articles", "", ""};
    for (const auto& cat : bundle.per_category)
      row.push_back(std::to_string(cat.article_count));
    csv::write_row(os, row);
  }
  const auto& rows0 = bundle.per_category.front().ratios.rows;
  for (Action action : {Action::Click, Action::Like}) {
    for (std::size_t r = 0; r < rows0.size(); ++r) {
      std::vector<std::string> row = {
          std::string(label(action)) + "_ratio_pct",
          std::string(label(rows0[r].axis)),
          std::string(label(rows0[r].value)),
      };
      for (const auto& cat : bundle.per_category) {
        const auto& src = cat.ratios.rows[r];
        row.push_back(csv::fmt6(action == Action::Click ? src.click_pct : src.like_pct));
      }
      csv::write_row(os, row);
    }
  }
  if (opts.emit_csv) writer.write("action_ratios.csv", os.str());

  if (opts.emit_json) {
    nlohmann::ordered_json j;
    for (const auto& cat : bundle.per_category) {
      nlohmann::ordered_json entry;
      entry["number_of_articles"] = cat.article_count;
      nlohmann::ordered_json ratios = nlohmann::ordered_json::array();
      for (const auto& row : cat.ratios.rows) {
        nlohmann::ordered_json r;
        r["axis"] = std::string(label(row.axis));
        r["value"] = std::string(label(row.value));
        r["click_pct"] = row.click_pct;
        r["like_pct"] = row.like_pct;
        ratios.push_back(std::move(r));
      }
      entry["ratios"] = std::move(ratios);
      j[cat.category] = std::move(entry);
    }
    writer.write("action_ratios.json", j.dump(2) + "\n");
  }
}

inline void emit_correlation_tables(const ReportBundle& bundle,
                                    const AnalyzeOptions& opts,
                                    detail::OutputWriter& writer) {
  std::vector<std::string> header = {"method", "pair"};
  for (Action action : {Action::Click, Action::Like})
    for (const auto& cat : bundle.per_category)
      header.push_back(detail::column_name(action, cat.category));

  std::ostringstream os;
  csv::write_row(os, header);
  struct Method {
    const char* name;
    bool normalized;  // true: pearson on normalized; false: spearman on raw
  };
  for (const Method method : {Method{"pearson_normalized", true},
                              Method{"spearman_raw", false}}) {
    for (std::size_t p = 0; p < bundle.pairs.size(); ++p) {
      std::vector<std::string> row = {method.name, bundle.pairs[p].name()};
      bool any = false;
      for (Action action : {Action::Click, Action::Like}) {
        for (const auto& cat : bundle.per_category) {
          auto it = cat.correlations.find(std::make_pair(p, action));
          std::optional<double> value;
          if (it != cat.correlations.end())
            value = method.normalized ? it->second.pearson_normalized
                                      : it->second.spearman_raw;
          if (value) {
            row.push_back(csv::fmt6(*value));
            any = true;
          } else {
            row.push_back("");
          }
        }
      }
      // Pairs with no usable data anywhere are omitted, not zero-filled.
      if (any) csv::write_row(os, row);
    }
  }
  if (opts.emit_csv) writer.write("correlations.csv", os.str());

  if (opts.emit_json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& cat : bundle.per_category) {
      for (std::size_t p = 0; p < bundle.pairs.size(); ++p) {
        for (Action action : {Action::Click, Action::Like}) {
          auto it = cat.correlations.find(std::make_pair(p, action));
          if (it == cat.correlations.end()) continue;
          nlohmann::ordered_json entry;
          entry["category"] = cat.category;
          entry["pair"] = bundle.pairs[p].name();
          entry["action"] = std::string(label(action));
          if (it->second.pearson_normalized)
            entry["pearson_normalized"] = *it->second.pearson_normalized;
          entry["n_normalized"] = it->second.n_normalized;
          if (it->second.spearman_raw)
            entry["spearman_raw"] = *it->second.spearman_raw;
          entry["n_raw"] = it->second.n_raw;
          j.push_back(std::move(entry));
        }
      }
    }
    writer.write("correlations.json", j.dump(2) + "\n");
  }
}

inline void emit_keyword_gate_counts(const ReportBundle& bundle,
                                     const AnalyzeOptions& opts,
                                     detail::OutputWriter& writer) {
  std::vector<std::string> header = {"pair"};
  for (Action action : {Action::Click, Action::Like})
    for (const auto& cat : bundle.per_category)
      header.push_back(detail::column_name(action, cat.category));

  std::ostringstream os;
  csv::write_row(os, header);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t p = 0; p < bundle.pairs.size(); ++p) {
    std::vector<std::string> row = {bundle.pairs[p].name()};
    for (Action action : {Action::Click, Action::Like}) {
      for (const auto& cat : bundle.per_category) {
        std::size_t kept = 0;
        for (const auto& cell : cat.detection.cells)
          if (cell.pair == bundle.pairs[p] && cell.action == action) kept = cell.kept;
        row.push_back(std::to_string(kept));
        nlohmann::ordered_json entry;
        entry["pair"] = bundle.pairs[p].name();
        entry["action"] = std::string(label(action));
        entry["category"] = cat.category;
        entry["kept"] = kept;
        j.push_back(std::move(entry));
      }
    }
    csv::write_row(os, row);
  }
  if (opts.emit_csv) writer.write("keyword_gate_counts.csv", os.str());
  if (opts.emit_json) writer.write("keyword_gate_counts.json", j.dump(2) + "\n");
}

inline void emit_biased_keywords(const ReportBundle& bundle,
                                 const AnalyzeOptions& opts,
                                 detail::OutputWriter& writer) {
  struct BandRow {
    const char* parameter;
    const char* band;
    BiasClass cls;
    bool toward_first;
  };
  static constexpr BandRow band_rows[] = {
      {"intercept", "upper", BiasClass::UpperIntercept, true},
      {"intercept", "lower", BiasClass::LowerIntercept, false},
      {"slope", "upper", BiasClass::UpperSlope, true},
      {"slope", "lower", BiasClass::LowerSlope, false},
  };

  std::vector<std::string> header = {"pair", "parameter", "band", "biased_toward"};
  for (Action action : {Action::Click, Action::Like})
    for (const auto& cat : bundle.per_category)
      header.push_back(detail::column_name(action, cat.category));

  std::ostringstream os;
  csv::write_row(os, header);
  for (std::size_t p = 0; p < bundle.pairs.size(); ++p) {
    const AttributePair& pair = bundle.pairs[p];
    for (const BandRow& band : band_rows) {
      std::vector<std::string> row = {
          pair.name(), band.parameter, band.band,
          std::string(label(band.toward_first ? pair.first : pair.second))};
      for (Action action : {Action::Click, Action::Like}) {
        for (const auto& cat : bundle.per_category) {
          std::string cell;
          for (const auto& ck : cat.detection.classified) {
            if (!(ck.pair == pair) || ck.action != action ||
                ck.bias_class != band.cls)
              continue;
            if (!cell.empty()) cell += "; ";
            cell += ck.keyword;
          }
          row.push_back(cell);  // blank cell when no keyword
        }
      }
      csv::write_row(os, row);
    }
  }
  if (opts.emit_csv) writer.write("biased_keywords.csv", os.str());

  if (opts.emit_json) {
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const auto& cat : bundle.per_category)
      for (const auto& ck : cat.detection.classified)
        all.push_back(classified_to_json(ck));
    writer.write("classified_keywords.json", all.dump(2) + "\n");

    nlohmann::ordered_json biased = nlohmann::ordered_json::array();
    for (const auto& cat : bundle.per_category)
      for (const auto& ck : cat.detection.classified)
        if (is_biased(ck.bias_class)) biased.push_back(classified_to_json(ck));
    writer.write("biased_keywords.json", biased.dump(2) + "\n");
  }
}

inline void emit_scatter_data(const ReportBundle& bundle, const AnalyzeOptions& opts,
                              detail::OutputWriter& writer) {
  if (!opts.emit_csv) return;
  for (const auto& cat : bundle.per_category) {
    for (const auto& [key, rows] : cat.scatter) {
      const auto& [pair_index, action] = key;
      const AttributePair& pair = bundle.pairs[pair_index];
      std::ostringstream os;
      csv::write_row(os, {"article_id",
                          "x_norm:" + std::string(label(pair.second)),
                          "y_norm:" + std::string(label(pair.first))});
      for (const ScatterRow& row : rows)
        csv::write_row(os, {row.article_id, csv::fmt6(row.x), csv::fmt6(row.y)});
      const std::string name = cat.category + "_" + pair.name() + "_" +
                               std::string(label(action)) + ".csv";
      writer.write(std::filesystem::path("scatter") / name, os.str());
    }
  }
}

inline std::vector<std::filesystem::path> write_bundle(const ReportBundle& bundle,
                                                       const AnalyzeOptions& opts) {
  detail::OutputWriter writer(opts.output_dir);
  try {
    emit_action_ratio_tables(bundle, opts, writer);
    emit_correlation_tables(bundle, opts, writer);
    emit_keyword_gate_counts(bundle, opts, writer);
    emit_biased_keywords(bundle, opts, writer);
    emit_scatter_data(bundle, opts, writer);
    writer.write("run_manifest.json", bundle.manifest.dump(2) + "\n");
  } catch (...) {
    writer.rollback();
    throw;
  }
  return writer.written();
}

// Exit codes: 0 success, 1 input errors, 2 empty dataset.
inline int run_pipeline(const AnalyzeOptions& opts) {
  try {
    const ReportBundle bundle = compute_bundle(opts);
    write_bundle(bundle, opts);
    return 0;
  } catch (const EmptyDatasetError& e) {
    log_message(LogLevel::Error, std::string("log_model: ") + e.what());
    return 2;
  } catch (const Error& e) {
    log_message(LogLevel::Error, e.what());
    return 1;
  } catch (const std::exception& e) {
    log_message(LogLevel::Error, e.what());
    return 1;
  }
}

}  // namespace biaslens
