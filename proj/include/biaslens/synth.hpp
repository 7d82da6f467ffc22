#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biaslens/bias_detector.hpp"
#include "biaslens/rng.hpp"
#include "biaslens/types.hpp"

namespace biaslens {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Multiplicative boost to the click probability of users holding `value`
// on articles whose title contains `keyword`. Likes inherit the click bias;
// an explicit like_multiplier additionally scales the like probability.
struct PlantedBias {
  std::string keyword;
  AttributeValue value = AttributeValue{Gender::Male};
  double multiplier = 1.0;
  std::optional<double> like_multiplier;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  // users_per_cell[gender][age bucket]
  std::array<std::array<std::size_t, kNumAgeBuckets>, kNumGenders> users_per_cell{};
  std::map<std::string, std::size_t> articles_per_category;
  std::vector<std::string> vocabulary;
  // Sampling weight per vocabulary entry; when empty, weights default to the
  // Zipf profile (i+1)^-zipf_exponent over list positions.
  std::vector<double> vocabulary_weights;
  double zipf_exponent = 1.0;
  double popularity_mu = 0.0;     // log-normal article attractiveness
  double popularity_sigma = 0.5;
  double base_click_prob = 0.02;
  double like_given_click_prob = 0.15;
  std::size_t title_min_keywords = 2;
  std::size_t title_max_keywords = 6;
  std::vector<PlantedBias> planted_biases;

  void validate() const {
    std::size_t total_users = 0;
    for (const auto& row : users_per_cell)
      for (std::size_t n : row) total_users += n;
    if (total_users == 0) throw ConfigError("users_per_cell: no users configured");
    if (articles_per_category.empty())
      throw ConfigError("articles_per_category: at least one category required");
    for (const auto& [cat, n] : articles_per_category)
      if (n == 0) throw ConfigError("articles_per_category['" + cat + "'] must be > 0");
    if (vocabulary.empty()) throw ConfigError("vocabulary: must not be empty");
    if (!vocabulary_weights.empty()) {
      if (vocabulary_weights.size() != vocabulary.size())
        throw ConfigError("vocabulary_weights: size must match vocabulary");
      for (double w : vocabulary_weights)
        if (!(w > 0.0)) throw ConfigError("vocabulary_weights: weights must be > 0");
    }
    if (!(base_click_prob > 0.0 && base_click_prob < 1.0))
      throw ConfigError("base_click_prob must be in (0,1)");
    if (!(like_given_click_prob > 0.0 && like_given_click_prob < 1.0))
      throw ConfigError("like_given_click_prob must be in (0,1)");
    if (title_min_keywords < 1 || title_max_keywords < title_min_keywords)
      throw ConfigError("title keyword range is invalid");
    if (title_max_keywords > vocabulary.size())
      throw ConfigError("title_max_keywords exceeds vocabulary size");
    if (!(popularity_sigma >= 0.0))
      throw ConfigError("popularity_sigma must be >= 0");
    std::set<std::string> vocab(vocabulary.begin(), vocabulary.end());
    if (vocab.size() != vocabulary.size())
      throw ConfigError("vocabulary: entries must be unique");
    for (const auto& plant : planted_biases) {
      if (!(plant.multiplier > 0.0))
        throw ConfigError("planted bias for '" + plant.keyword +
                          "': multiplier must be > 0");
      if (plant.like_multiplier && !(*plant.like_multiplier > 0.0))
        throw ConfigError("planted bias for '" + plant.keyword +
                          "': like multiplier must be > 0");
      if (vocab.find(plant.keyword) == vocab.end())
        throw ConfigError("planted bias keyword '" + plant.keyword +
                          "' is not in the vocabulary");
    }
  }

  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

struct GroundTruth {
  std::vector<PlantedBias> plants;

  struct Expectation {
    std::string keyword;
    AttributePair pair;
    AttributeValue direction;  // attribute the deviation favors
  };

  // Expands plants over the canonical pairs containing the planted value.
  // multiplier > 1 favors the planted value; < 1 favors the pair's other
  // value; exactly 1 plants nothing.
  std::vector<Expectation> expectations() const {
    std::vector<Expectation> out;
    for (const PlantedBias& plant : plants) {
      if (plant.multiplier == 1.0) continue;
      for (const AttributePair& pair : canonical_pairs()) {
        if (pair.first != plant.value && pair.second != plant.value) continue;
        AttributeValue favored = plant.value;
        if (plant.multiplier < 1.0)
          favored = pair.first == plant.value ? pair.second : pair.first;
        out.push_back({plant.keyword, pair, favored});
      }
    }
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const PlantedBias& p : plants) {
      nlohmann::ordered_json item;
      item["keyword"] = p.keyword;
      item["axis"] = std::string(label(axis_of(p.value)));
      item["value"] = std::string(label(p.value));
      item["multiplier"] = p.multiplier;
      if (p.like_multiplier) item["like_multiplier"] = *p.like_multiplier;
      arr.push_back(std::move(item));
    }
    return arr;
  }

  static GroundTruth from_json(const nlohmann::json& j) {
    GroundTruth truth;
    if (!j.is_array()) throw ConfigError("ground truth: expected a JSON array");
    for (const auto& item : j) {
      PlantedBias p;
      p.keyword = item.at("keyword").get<std::string>();
      auto value = attribute_value_from_labels(item.at("axis").get<std::string>(),
                                               item.at("value").get<std::string>());
      if (!value) throw ConfigError("ground truth: unknown axis/value");
      p.value = *value;
      p.multiplier = item.at("multiplier").get<double>();
      if (item.contains("like_multiplier"))
        p.like_multiplier = item.at("like_multiplier").get<double>();
      truth.plants.push_back(std::move(p));
    }
    return truth;
  }
};

struct SynthDataset {
  std::vector<Article> articles;
  std::vector<InteractionEvent> events;
  GroundTruth truth;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace detail {

// Weighted draw by cumulative-sum binary search.
inline std::size_t weighted_pick(Rng& rng, std::span<const double> cumulative) {
  const double total = cumulative.back();
  const double u = rng.uniform01() * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

// Raw age categories cycle within each bucket so bucketing stays exercised.
inline AgeCategory age_category_for(AgeBucket bucket, std::size_t user_index) {
  switch (bucket) {
    case AgeBucket::Young: {
      constexpr std::array<AgeCategory, 3> young = {
          AgeCategory::Under20, AgeCategory::Age20to24, AgeCategory::Age25to29};
      return young[user_index % young.size()];
    }
    case AgeBucket::Middle:
      return AgeCategory::Thirties;
    default: {
      constexpr std::array<AgeCategory, 2> older = {AgeCategory::Forties,
                                                    AgeCategory::Over50};
      return older[user_index % older.size()];
    }
  }
}

}  // namespace detail

// Deterministic generator: identical seed, identical dataset. Titles are
// keyword bags; clicks are Bernoulli with probability
//   clamp(base_click_prob * popularity * product of matching multipliers)
// and likes are Bernoulli(like_given_click_prob * like multipliers) given a
// click, so generated likes never exceed clicks.
inline SynthDataset generate_dataset(const SynthConfig& config) {
  config.validate();
  SynthDataset out;
  out.truth.plants = config.planted_biases;
  Rng rng(config.seed);

  // Vocabulary sampling weights.
  std::vector<double> weights = config.vocabulary_weights;
  if (weights.empty()) {
    weights.resize(config.vocabulary.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
      weights[i] = std::pow(static_cast<double>(i + 1), -config.zipf_exponent);
  }
  std::vector<double> cumulative(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cumulative[i] = acc;
  }

  // Articles: popularity plus a sampled keyword-bag title per category.
  struct ArticleState {
    std::size_t index;
    double popularity;
    std::vector<std::size_t> keyword_ids;
  };
  std::vector<ArticleState> states;
  std::size_t article_seq = 0;
  for (const auto& [category, n_articles] : config.articles_per_category) {
    for (std::size_t i = 0; i < n_articles; ++i) {
      ArticleState st;
      st.index = article_seq;
      st.popularity =
          std::exp(config.popularity_mu + config.popularity_sigma * rng.normal());
      const std::size_t bag_size =
          config.title_min_keywords +
          rng.below(config.title_max_keywords - config.title_min_keywords + 1);
      std::set<std::size_t> picked;
      while (picked.size() < bag_size)
        picked.insert(detail::weighted_pick(rng, cumulative));
      st.keyword_ids.assign(picked.begin(), picked.end());

      char id[32];
      std::snprintf(id, sizeof(id), "a%06zu", article_seq);
      Article art;
      art.article_id = id;
      art.category = category;
      out.articles.push_back(std::move(art));
      states.push_back(std::move(st));
      ++article_seq;
    }
  }

  // Guarantee every planted keyword appears in at least three titles.
  for (const PlantedBias& plant : config.planted_biases) {
    const auto it = std::find(config.vocabulary.begin(), config.vocabulary.end(),
                              plant.keyword);
    const std::size_t kid =
        static_cast<std::size_t>(it - config.vocabulary.begin());
    std::size_t occurrences = 0;
    for (const auto& st : states)
      occurrences += std::count(st.keyword_ids.begin(), st.keyword_ids.end(), kid);
    for (std::size_t a = 0; occurrences < 3 && a < states.size(); ++a) {
      auto& ids = states[a].keyword_ids;
      if (std::find(ids.begin(), ids.end(), kid) != ids.end()) continue;
      ids.push_back(kid);
      std::sort(ids.begin(), ids.end());
      ++occurrences;
    }
  }
  for (std::size_t a = 0; a < states.size(); ++a) {
    std::string title;
    for (std::size_t kid : states[a].keyword_ids) {
      if (!title.empty()) title += ' ';
      title += config.vocabulary[kid];
    }
    out.articles[a].title = std::move(title);
  }

  // Per-article per-cell click probabilities with planted multipliers.
  struct Cell {
    Gender gender;
    AgeBucket bucket;
    std::size_t n_users;
    std::size_t first_user;
  };
  std::vector<Cell> cells;
  std::size_t user_seq = 0;
  for (std::size_t g = 0; g < kNumGenders; ++g) {
    for (std::size_t b = 0; b < kNumAgeBuckets; ++b) {
      Cell cell{static_cast<Gender>(g), static_cast<AgeBucket>(b),
                config.users_per_cell[g][b], user_seq};
      user_seq += cell.n_users;
      cells.push_back(cell);
    }
  }

  auto matches = [](const AttributeValue& value, const Cell& cell) {
    if (const auto* g = std::get_if<Gender>(&value)) return *g == cell.gender;
    return std::get<AgeBucket>(value) == cell.bucket;
  };

  const double clamp_lo = 1e-12;
  const double clamp_hi = 1.0 - 1e-12;
  std::string user_id;
  for (std::size_t a = 0; a < states.size(); ++a) {
    const ArticleState& st = states[a];
    const Article& art = out.articles[a];
    for (const Cell& cell : cells) {
      double click_p = config.base_click_prob * st.popularity;
      double like_p = config.like_given_click_prob;
      for (const PlantedBias& plant : config.planted_biases) {
        if (!matches(plant.value, cell)) continue;
        for (std::size_t kid : st.keyword_ids) {
          if (config.vocabulary[kid] != plant.keyword) continue;
          click_p *= plant.multiplier;
          if (plant.like_multiplier) like_p *= *plant.like_multiplier;
        }
      }
      click_p = std::clamp(click_p, clamp_lo, clamp_hi);
      like_p = std::clamp(like_p, clamp_lo, clamp_hi);

      for (std::size_t u = 0; u < cell.n_users; ++u) {
        if (!rng.bernoulli(click_p)) continue;
        const std::size_t uid = cell.first_user + u;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "u%07zu", uid);
        InteractionEvent click;
        click.user_id = buf;
        click.article_id = art.article_id;
        click.action = Action::Click;
        click.gender = cell.gender;
        click.age = detail::age_category_for(cell.bucket, uid);
        const bool liked = rng.bernoulli(like_p);
        out.events.push_back(click);
        if (liked) {
          InteractionEvent like = out.events.back();
          like.action = Action::Like;
          out.events.push_back(std::move(like));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization (bit-exact with the ingestion formats)
// ---------------------------------------------------------------------------

inline void write_events_jsonl(std::span<const InteractionEvent> events,
                               std::ostream& os) {
  for (const InteractionEvent& ev : events) {
    nlohmann::ordered_json line;
    line["user_id"] = ev.user_id;
    line["article_id"] = ev.article_id;
    line["action"] = std::string(label(ev.action));
    line["gender"] = std::string(label(ev.gender));
    line["age"] = std::string(label(ev.age));
    if (ev.ts) line["ts"] = *ev.ts;
    os << line.dump() << '\n';
  }
}

inline void write_articles_jsonl(std::span<const Article> articles,
                                 std::ostream& os) {
  for (const Article& art : articles) {
    nlohmann::ordered_json line;
    line["article_id"] = art.article_id;
    line["title"] = art.title;
    line["category"] = art.category;
    os << line.dump() << '\n';
  }
}

inline void write_synth_dataset(const SynthDataset& data,
                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "events.jsonl", std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / "events.jsonl").string());
    write_events_jsonl(data.events, os);
  }
  {
    std::ofstream os(dir / "articles.jsonl", std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / "articles.jsonl").string());
    write_articles_jsonl(data.articles, os);
  }
  {
    std::ofstream os(dir / "ground_truth.json", std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / "ground_truth.json").string());
    os << data.truth.to_json().dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Detection scoring
// ---------------------------------------------------------------------------

struct CellMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
  bool zero_detections = false;
};

struct EvaluationReport {
  struct CellKey {
    AttributePair pair;
    Action action;
    bool operator<(const CellKey& o) const {
      if (!(pair == o.pair)) return pair < o.pair;
      return action < o.action;
    }
  };
  std::map<CellKey, CellMetrics> per_cell;

  // Keyword-level summary: a planted keyword counts as recovered when some
  // flagged (pair, direction) of it matches an expectation; any other flagged
  // keyword is spurious.
  std::size_t truth_keywords = 0;
  std::size_t detected_keywords = 0;
  std::size_t recovered_keywords = 0;
  std::size_t spurious_keywords = 0;
  double precision = 1.0;
  double recall = 1.0;
  bool zero_detections = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["truth_keywords"] = truth_keywords;
    j["detected_keywords"] = detected_keywords;
    j["recovered_keywords"] = recovered_keywords;
    j["spurious_keywords"] = spurious_keywords;
    j["precision"] = precision;
    j["recall"] = recall;
    j["zero_detections"] = zero_detections;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& [key, m] : per_cell) {
      nlohmann::ordered_json c;
      c["pair"] = key.pair.name();
      c["action"] = std::string(label(key.action));
      c["true_positives"] = m.true_positives;
      c["false_positives"] = m.false_positives;
      c["false_negatives"] = m.false_negatives;
      c["precision"] = m.precision;
      c["recall"] = m.recall;
      c["zero_detections"] = m.zero_detections;
      cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
  }
};

inline EvaluationReport evaluate_detection(
    std::span<const ClassifiedKeyword> detected, const GroundTruth& truth) {
  EvaluationReport report;
  const auto expectations = truth.expectations();

  // (keyword, pair) -> expected direction
  std::map<std::pair<std::string, AttributePair>, AttributeValue> expected;
  std::set<std::string> truth_kw;
  for (const auto& e : expectations) {
    expected.emplace(std::make_pair(e.keyword, e.pair), e.direction);
    truth_kw.insert(e.keyword);
  }
  report.truth_keywords = truth_kw.size();

  std::set<std::string> flagged_kw;
  std::set<std::string> recovered_kw;
  std::map<EvaluationReport::CellKey, std::set<std::string>> matched_truth;
  std::set<EvaluationReport::CellKey> seen_cells;

  for (const ClassifiedKeyword& ck : detected) {
    const EvaluationReport::CellKey key{ck.pair, ck.action};
    seen_cells.insert(key);
    if (!is_biased(ck.bias_class)) continue;
    flagged_kw.insert(ck.keyword);
    auto& metrics = report.per_cell[key];
    auto it = expected.find(std::make_pair(ck.keyword, ck.pair));
    if (it != expected.end() && ck.biased_toward && *ck.biased_toward == it->second) {
      ++metrics.true_positives;
      matched_truth[key].insert(ck.keyword);
      recovered_kw.insert(ck.keyword);
    } else {
      ++metrics.false_positives;
    }
  }

  for (const auto& key : seen_cells) {
    auto& metrics = report.per_cell[key];
    std::size_t pair_truth = 0;
    for (const auto& e : expectations)
      if (e.pair == key.pair) ++pair_truth;
    const std::size_t matched = matched_truth[key].size();
    metrics.false_negatives = pair_truth - matched;
    const std::size_t flagged = metrics.true_positives + metrics.false_positives;
    metrics.zero_detections = flagged == 0;
    metrics.precision =
        flagged == 0 ? 1.0
                     : static_cast<double>(metrics.true_positives) /
                           static_cast<double>(flagged);
    metrics.recall = pair_truth == 0
                         ? 1.0
                         : static_cast<double>(matched) /
                               static_cast<double>(pair_truth);
  }

  report.detected_keywords = flagged_kw.size();
  report.recovered_keywords = recovered_kw.size();
  report.spurious_keywords = flagged_kw.size() - recovered_kw.size();
  report.zero_detections = flagged_kw.empty();
  report.precision = flagged_kw.empty()
                         ? 1.0
                         : static_cast<double>(recovered_kw.size()) /
                               static_cast<double>(flagged_kw.size());
  report.recall = truth_kw.empty()
                      ? 1.0
                      : static_cast<double>(recovered_kw.size()) /
                            static_cast<double>(truth_kw.size());
  return report;
}

// ---------------------------------------------------------------------------
// JSON config round-trip
// ---------------------------------------------------------------------------

inline SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& users = j.at("users_per_cell");
    for (std::size_t g = 0; g < kNumGenders; ++g) {
      const auto& row = users.at(std::string(label(static_cast<Gender>(g))));
      for (std::size_t b = 0; b < kNumAgeBuckets; ++b)
        c.users_per_cell[g][b] =
            row.at(std::string(label(static_cast<AgeBucket>(b)))).get<std::size_t>();
    }
    for (const auto& [cat, n] : j.at("articles_per_category").items())
      c.articles_per_category[cat] = n.get<std::size_t>();
    c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    if (j.contains("vocabulary_weights"))
      c.vocabulary_weights = j.at("vocabulary_weights").get<std::vector<double>>();
    if (j.contains("zipf_exponent")) c.zipf_exponent = j.at("zipf_exponent").get<double>();
    const auto& pop = j.at("base_popularity");
    c.popularity_mu = pop.at("mu").get<double>();
    c.popularity_sigma = pop.at("sigma").get<double>();
    c.base_click_prob = j.at("base_click_prob").get<double>();
    c.like_given_click_prob = j.at("like_given_click_prob").get<double>();
    if (j.contains("planted_biases")) {
      for (const auto& item : j.at("planted_biases")) {
        PlantedBias p;
        p.keyword = item.at("keyword").get<std::string>();
        auto value = attribute_value_from_labels(item.at("axis").get<std::string>(),
                                                 item.at("value").get<std::string>());
        if (!value)
          throw ConfigError("planted_biases: unknown axis/value for '" + p.keyword + "'");
        p.value = *value;
        p.multiplier = item.at("multiplier").get<double>();
        if (item.contains("like_multiplier"))
          p.like_multiplier = item.at("like_multiplier").get<double>();
        c.planted_biases.push_back(std::move(p));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::ordered_json SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  nlohmann::ordered_json users;
  for (std::size_t g = 0; g < kNumGenders; ++g) {
    nlohmann::ordered_json row;
    for (std::size_t b = 0; b < kNumAgeBuckets; ++b)
      row[std::string(label(static_cast<AgeBucket>(b)))] = users_per_cell[g][b];
    users[std::string(label(static_cast<Gender>(g)))] = std::move(row);
  }
  j["users_per_cell"] = std::move(users);
  j["articles_per_category"] = articles_per_category;
  j["vocabulary"] = vocabulary;
  if (!vocabulary_weights.empty()) j["vocabulary_weights"] = vocabulary_weights;
  j["zipf_exponent"] = zipf_exponent;
  j["base_popularity"] = {{"mu", popularity_mu}, {"sigma", popularity_sigma}};
  j["base_click_prob"] = base_click_prob;
  j["like_given_click_prob"] = like_given_click_prob;
  nlohmann::ordered_json plants = nlohmann::ordered_json::array();
  for (const PlantedBias& p : planted_biases) {
    nlohmann::ordered_json item;
    item["keyword"] = p.keyword;
    item["axis"] = std::string(label(axis_of(p.value)));
    item["value"] = std::string(label(p.value));
    item["multiplier"] = p.multiplier;
    if (p.like_multiplier) item["like_multiplier"] = *p.like_multiplier;
    plants.push_back(std::move(item));
  }
  j["planted_biases"] = std::move(plants);
  return j;
}

}  // namespace biaslens
