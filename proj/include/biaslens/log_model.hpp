#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biaslens/csv.hpp"
#include "biaslens/types.hpp"

namespace biaslens {

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

enum class InputFormat : std::uint8_t { Jsonl = 0, Csv = 1 };

enum class ParseErrorKind : std::uint8_t {
  MalformedLine,
  MissingField,
  UnknownActionLabel,
  UnknownGenderLabel,
  UnknownAgeLabel,
  DuplicateArticleId,
};

inline std::string_view label(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MalformedLine: return "MalformedLine";
    case ParseErrorKind::MissingField: return "MissingField";
    case ParseErrorKind::UnknownActionLabel: return "UnknownActionLabel";
    case ParseErrorKind::UnknownGenderLabel: return "UnknownGenderLabel";
    case ParseErrorKind::UnknownAgeLabel: return "UnknownAgeLabel";
    default: return "DuplicateArticleId";
  }
}

// One rejected input line. Malformed lines are reported, never silently dropped.
struct ParseIssue {
  std::size_t line = 0;  // 1-based
  ParseErrorKind kind = ParseErrorKind::MalformedLine;
  std::string message;
};

struct EventParseResult {
  std::vector<InteractionEvent> events;
  std::vector<ParseIssue> issues;
  std::size_t lines_read = 0;
};

struct ArticleParseResult {
  std::vector<Article> articles;
  std::vector<ParseIssue> issues;
  std::size_t lines_read = 0;
};

namespace detail {

inline std::optional<std::string> json_string_field(const nlohmann::json& obj,
                                                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

struct RawEventFields {
  std::optional<std::string> user_id, article_id, action, gender, age, ts;
};

inline void decode_event(const RawEventFields& raw, std::size_t line_no,
                         EventParseResult& out) {
  auto missing = [&](const char* name) {
    out.issues.push_back({line_no, ParseErrorKind::MissingField,
                          std::string("missing field '") + name + "'"});
  };
  if (!raw.user_id) return missing("user_id");
  if (!raw.article_id) return missing("article_id");
  if (!raw.action) return missing("action");
  if (!raw.gender) return missing("gender");
  if (!raw.age) return missing("age");

  const auto action = action_from_label(*raw.action);
  if (!action) {
    out.issues.push_back({line_no, ParseErrorKind::UnknownActionLabel,
                          "unknown action label '" + *raw.action + "'"});
    return;
  }
  const auto gender = gender_from_label(*raw.gender);
  if (!gender) {
    out.issues.push_back({line_no, ParseErrorKind::UnknownGenderLabel,
                          "unknown gender label '" + *raw.gender + "'"});
    return;
  }
  const auto age = age_from_label(*raw.age);
  if (!age) {
    out.issues.push_back({line_no, ParseErrorKind::UnknownAgeLabel,
                          "unknown age label '" + *raw.age + "'"});
    return;
  }
  InteractionEvent ev;
  ev.user_id = *raw.user_id;
  ev.article_id = *raw.article_id;
  ev.action = *action;
  ev.gender = *gender;
  ev.age = *age;
  ev.ts = raw.ts;
  out.events.push_back(std::move(ev));
}

// Header-driven column lookup; `required` lists mandatory column names.
inline std::optional<std::map<std::string, std::size_t>> csv_header_columns(
    const std::string& header_line, std::span<const char* const> required,
    std::string& error) {
  std::vector<std::string> cols;
  if (!csv::split(header_line, cols)) {
    error = "unbalanced quotes in header";
    return std::nullopt;
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cols.size(); ++i) index.emplace(cols[i], i);
  for (const char* name : required) {
    if (index.find(name) == index.end()) {
      error = std::string("header lacks column '") + name + "'";
      return std::nullopt;
    }
  }
  return index;
}

inline std::optional<std::string> csv_field(const std::vector<std::string>& row,
                                            const std::map<std::string, std::size_t>& cols,
                                            const char* name) {
  auto it = cols.find(name);
  if (it == cols.end() || it->second >= row.size()) return std::nullopt;
  return row[it->second];
}

}  // namespace detail

// Parses one event per line. Events come back in input order; every bad line
// is recorded in `issues` with its 1-based line number.
inline EventParseResult parse_events(std::istream& in, InputFormat format) {
  EventParseResult out;
  std::string line;
  std::size_t line_no = 0;

  std::map<std::string, std::size_t> columns;
  if (format == InputFormat::Csv) {
    if (!std::getline(in, line)) return out;  // empty stream: no events, no errors
    ++line_no;
    out.lines_read = 1;
    static constexpr std::array<const char*, 5> required = {
        "user_id", "article_id", "action", "gender", "age"};
    std::string err;
    auto cols = detail::csv_header_columns(line, required, err);
    if (!cols) {
      out.issues.push_back({line_no, ParseErrorKind::MalformedLine, err});
      return out;
    }
    columns = std::move(*cols);
  }

  while (std::getline(in, line)) {
    ++line_no;
    ++out.lines_read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    detail::RawEventFields raw;
    if (format == InputFormat::Jsonl) {
      nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        out.issues.push_back({line_no, ParseErrorKind::MalformedLine,
                              "line is not a JSON object"});
        continue;
      }
      raw.user_id = detail::json_string_field(obj, "user_id");
      raw.article_id = detail::json_string_field(obj, "article_id");
      raw.action = detail::json_string_field(obj, "action");
      raw.gender = detail::json_string_field(obj, "gender");
      raw.age = detail::json_string_field(obj, "age");
      raw.ts = detail::json_string_field(obj, "ts");
    } else {
      std::vector<std::string> row;
      if (!csv::split(line, row)) {
        out.issues.push_back({line_no, ParseErrorKind::MalformedLine,
                              "unbalanced quotes"});
        continue;
      }
      raw.user_id = detail::csv_field(row, columns, "user_id");
      raw.article_id = detail::csv_field(row, columns, "article_id");
      raw.action = detail::csv_field(row, columns, "action");
      raw.gender = detail::csv_field(row, columns, "gender");
      raw.age = detail::csv_field(row, columns, "age");
      auto ts = detail::csv_field(row, columns, "ts");
      if (ts && !ts->empty()) raw.ts = ts;
    }
    detail::decode_event(raw, line_no, out);
  }
  return out;
}

inline ArticleParseResult parse_articles(std::istream& in, InputFormat format) {
  ArticleParseResult out;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;

  std::map<std::string, std::size_t> columns;
  if (format == InputFormat::Csv) {
    if (!std::getline(in, line)) return out;
    ++line_no;
    out.lines_read = 1;
    static constexpr std::array<const char*, 3> required = {"article_id", "title",
                                                            "category"};
    std::string err;
    auto cols = detail::csv_header_columns(line, required, err);
    if (!cols) {
      out.issues.push_back({line_no, ParseErrorKind::MalformedLine, err});
      return out;
    }
    columns = std::move(*cols);
  }

  while (std::getline(in, line)) {
    ++line_no;
    ++out.lines_read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::optional<std::string> id, title, category;
    if (format == InputFormat::Jsonl) {
      nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        out.issues.push_back({line_no, ParseErrorKind::MalformedLine,
                              "line is not a JSON object"});
        continue;
      }
      id = detail::json_string_field(obj, "article_id");
      title = detail::json_string_field(obj, "title");
      category = detail::json_string_field(obj, "category");
    } else {
      std::vector<std::string> row;
      if (!csv::split(line, row)) {
        out.issues.push_back({line_no, ParseErrorKind::MalformedLine,
                              "unbalanced quotes"});
        continue;
      }
      id = detail::csv_field(row, columns, "article_id");
      title = detail::csv_field(row, columns, "title");
      category = detail::csv_field(row, columns, "category");
    }

    auto missing = [&](const char* name) {
      out.issues.push_back({line_no, ParseErrorKind::MissingField,
                            std::string("missing field '") + name + "'"});
    };
    if (!id) { missing("article_id"); continue; }
    if (!title || title->empty()) { missing("title"); continue; }
    if (!category) { missing("category"); continue; }
    if (!seen_ids.insert(*id).second) {
      out.issues.push_back({line_no, ParseErrorKind::DuplicateArticleId,
                            "duplicate article_id '" + *id + "'"});
      continue;
    }
    out.articles.push_back(Article{*id, *title, *category});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counts matrix
// ---------------------------------------------------------------------------

// Per-article counts for both axes. Each event increments one gender cell and
// one age-bucket cell, so either axis sums back to the article total.
struct ArticleCounts {
  std::array<std::array<std::uint64_t, kNumActions>, kNumGenders> by_gender{};
  std::array<std::array<std::uint64_t, kNumActions>, kNumAgeBuckets> by_age{};

  std::uint64_t total(Action action) const {
    const auto a = static_cast<std::size_t>(action);
    std::uint64_t t = 0;
    for (const auto& g : by_gender) t += g[a];
    return t;
  }
  std::uint64_t total_clicks() const { return total(Action::Click); }

  void add(Gender g, AgeBucket b, Action action, std::uint64_t count = 1) {
    const auto a = static_cast<std::size_t>(action);
    by_gender[static_cast<std::size_t>(g)][a] += count;
    by_age[static_cast<std::size_t>(b)][a] += count;
  }

  std::uint64_t at(const AttributeValue& value, Action action) const {
    const auto a = static_cast<std::size_t>(action);
    if (const auto* g = std::get_if<Gender>(&value))
      return by_gender[static_cast<std::size_t>(*g)][a];
    return by_age[static_cast<std::size_t>(std::get<AgeBucket>(value))][a];
  }

  void merge(const ArticleCounts& other) {
    for (std::size_t g = 0; g < kNumGenders; ++g)
      for (std::size_t a = 0; a < kNumActions; ++a)
        by_gender[g][a] += other.by_gender[g][a];
    for (std::size_t b = 0; b < kNumAgeBuckets; ++b)
      for (std::size_t a = 0; a < kNumActions; ++a)
        by_age[b][a] += other.by_age[b][a];
  }
};

// article -> counts. Merging is element-wise integer addition, so sharded
// aggregation can combine partial matrices in any order.
struct CountsMatrix {
  std::map<std::string, ArticleCounts> rows;

  void add(const InteractionEvent& ev) {
    rows[ev.article_id].add(ev.gender, bucket_age(ev.age), ev.action);
  }
  std::uint64_t at(const std::string& article_id, const AttributeValue& value,
                   Action action) const {
    auto it = rows.find(article_id);
    return it == rows.end() ? 0 : it->second.at(value, action);
  }
  void merge(const CountsMatrix& other) {
    for (const auto& [id, counts] : other.rows) rows[id].merge(counts);
  }
};

// ---------------------------------------------------------------------------
// Dataset construction
// ---------------------------------------------------------------------------

struct Dataset {
  std::map<std::string, Article> catalog;  // retained articles only
  CountsMatrix counts;
  std::string category;
  std::uint64_t min_clicks = 100;
};

struct BuildReport {
  std::uint64_t unknown_article_events = 0;
  std::uint64_t deduplicated_events = 0;
  // Cells where likes exceed clicks; tolerated with a warning (logs may be lossy).
  std::uint64_t like_exceeds_click_cells = 0;
};

struct BuildResult {
  Dataset dataset;
  BuildReport report;
};

// Keeps articles of `category` whose total click count is strictly greater
// than `min_clicks`, then aggregates all their events.
inline BuildResult build_dataset(std::span<const InteractionEvent> events,
                                 std::span<const Article> catalog,
                                 const std::string& category,
                                 std::uint64_t min_clicks,
                                 bool dedup_users = false) {
  BuildResult out;
  out.dataset.category = category;
  out.dataset.min_clicks = min_clicks;

  std::map<std::string, const Article*> in_category;
  for (const Article& art : catalog)
    if (art.category == category) in_category.emplace(art.article_id, &art);

  std::set<std::string> known_ids;
  for (const Article& art : catalog) known_ids.insert(art.article_id);

  CountsMatrix all_counts;
  std::set<std::string> dedup_seen;
  for (const InteractionEvent& ev : events) {
    if (known_ids.find(ev.article_id) == known_ids.end()) {
      ++out.report.unknown_article_events;
      continue;
    }
    if (in_category.find(ev.article_id) == in_category.end()) continue;
    if (dedup_users) {
      std::string key = ev.user_id;
      key += '\x1f';
      key += ev.article_id;
      key += '\x1f';
      key += ev.action == Action::Click ? 'c' : 'l';
      if (!dedup_seen.insert(std::move(key)).second) {
        ++out.report.deduplicated_events;
        continue;
      }
    }
    all_counts.add(ev);
  }

  for (auto& [id, counts] : all_counts.rows) {
    if (counts.total_clicks() <= min_clicks) continue;
    out.dataset.catalog.emplace(id, *in_category.at(id));
    out.dataset.counts.rows.emplace(id, counts);
  }
  if (out.dataset.catalog.empty())
    throw EmptyDatasetError("no article in category '" + category +
                            "' exceeds " + std::to_string(min_clicks) + " clicks");

  for (const auto& [id, counts] : out.dataset.counts.rows) {
    for (std::size_t g = 0; g < kNumGenders; ++g)
      if (counts.by_gender[g][1] > counts.by_gender[g][0])
        ++out.report.like_exceeds_click_cells;
    for (std::size_t b = 0; b < kNumAgeBuckets; ++b)
      if (counts.by_age[b][1] > counts.by_age[b][0])
        ++out.report.like_exceeds_click_cells;
  }
  return out;
}

inline std::vector<AttributeValue> axis_values(Axis axis) {
  if (axis == Axis::Gender)
    return {AttributeValue{Gender::Male}, AttributeValue{Gender::Female}};
  return {AttributeValue{AgeBucket::Young}, AttributeValue{AgeBucket::Middle},
          AttributeValue{AgeBucket::Older}};
}

// One count vector per attribute value, aligned over the full retained
// article set (absent articles fill with 0).
inline std::map<AttributeValue, std::map<std::string, std::uint64_t>>
aggregate_counts(const Dataset& dataset, Axis axis, Action action) {
  std::map<AttributeValue, std::map<std::string, std::uint64_t>> out;
  for (const AttributeValue& value : axis_values(axis)) {
    auto& series = out[value];
    for (const auto& [id, counts] : dataset.counts.rows)
      series.emplace(id, counts.at(value, action));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Action ratio table
// ---------------------------------------------------------------------------

struct ActionRatioRow {
  Axis axis;
  AttributeValue value;
  double click_pct = 0.0;
  double like_pct = 0.0;
};

struct ActionRatioTable {
  std::size_t article_count = 0;
  std::vector<ActionRatioRow> rows;  // gender values first, then age buckets
};

inline ActionRatioTable action_ratio_table(const Dataset& dataset) {
  ActionRatioTable table;
  table.article_count = dataset.catalog.size();

  for (Axis axis : {Axis::Gender, Axis::Age}) {
    std::map<AttributeValue, std::array<std::uint64_t, kNumActions>> totals;
    for (const AttributeValue& value : axis_values(axis)) totals[value] = {0, 0};
    std::array<std::uint64_t, kNumActions> axis_totals{0, 0};
    for (const auto& [id, counts] : dataset.counts.rows) {
      for (const AttributeValue& value : axis_values(axis)) {
        for (std::size_t a = 0; a < kNumActions; ++a) {
          const auto c = counts.at(value, static_cast<Action>(a));
          totals[value][a] += c;
          axis_totals[a] += c;
        }
      }
    }
    for (const AttributeValue& value : axis_values(axis)) {
      ActionRatioRow row;
      row.axis = axis;
      row.value = value;
      const auto pct = [&](std::size_t a) {
        return axis_totals[a] == 0
                   ? 0.0
                   : 100.0 * static_cast<double>(totals[value][a]) /
                         static_cast<double>(axis_totals[a]);
      };
      row.click_pct = pct(0);
      row.like_pct = pct(1);
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace biaslens
