#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biaslens/types.hpp"

namespace biaslens {

// Deterministic pure function from a title to its tokens. Alternative
// implementations (e.g. a morphological analyzer) plug in here.
using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

namespace detail {

// Decodes one UTF-8 code point; on invalid input consumes one byte and
// reports it as a separator.
inline bool next_codepoint(std::string_view s, std::size_t& i, std::uint32_t& cp,
                           std::size_t& len) {
  const auto byte = [&](std::size_t k) {
    return static_cast<unsigned char>(s[k]);
  };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    cp = b0;
    len = 1;
    return true;
  }
  std::size_t need = 0;
  std::uint32_t value = 0;
  if ((b0 & 0xE0) == 0xC0) { need = 1; value = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { need = 2; value = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { need = 3; value = b0 & 0x07; }
  else { cp = 0; len = 1; return false; }
  if (i + need >= s.size()) { cp = 0; len = 1; return false; }
  for (std::size_t k = 1; k <= need; ++k) {
    const unsigned char bk = byte(i + k);
    if ((bk & 0xC0) != 0x80) { cp = 0; len = 1; return false; }
    value = (value << 6) | (bk & 0x3F);
  }
  cp = value;
  len = need + 1;
  return true;
}

}  // namespace detail

// Default tokenizer: lowercases ASCII letters, splits on ASCII whitespace,
// punctuation and control characters, keeps non-ASCII code points verbatim,
// and discards pure-numeric and single-code-point tokens.
inline std::vector<std::string> default_tokenizer(std::string_view title) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t current_cps = 0;
  bool all_digits = true;

  auto flush = [&]() {
    if (current_cps >= 2 && !all_digits) tokens.push_back(current);
    current.clear();
    current_cps = 0;
    all_digits = true;
  };

  std::size_t i = 0;
  while (i < title.size()) {
    std::uint32_t cp = 0;
    std::size_t len = 1;
    const bool ok = detail::next_codepoint(title, i, cp, len);
    if (!ok) {
      flush();
      i += len;
      continue;
    }
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
        current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        ++current_cps;
        all_digits = false;
      } else if (c >= '0' && c <= '9') {
        current.push_back(c);
        ++current_cps;
      } else {
        flush();
      }
    } else {
      current.append(title.substr(i, len));
      ++current_cps;
      all_digits = false;
    }
    i += len;
  }
  flush();
  return tokens;
}

inline std::vector<std::string> tokenize_title(std::string_view title,
                                               const Tokenizer& tokenizer) {
  return tokenizer(title);
}

// Exact-match exclusion list; mechanizes the manual removal of meaningless
// words so runs stay reproducible.
class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::set<std::string> words) : words_(std::move(words)) {}

  // One token per line, UTF-8; blank lines and lines starting with '#' skipped.
  static StopwordList from_stream(std::istream& in) {
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      const auto end = line.find_last_not_of(" \t");
      std::string word = line.substr(start, end - start + 1);
      if (word.empty() || word[0] == '#') continue;
      words.insert(std::move(word));
    }
    return StopwordList(std::move(words));
  }

  static StopwordList from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword file: " + path.string());
    return from_stream(in);
  }

  bool contains(const std::string& token) const {
    return words_.count(token) > 0;
  }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

// Keywords ranked by document frequency (articles containing the keyword,
// counted once per article), frequency-descending with lexicographic
// tie-break; postings map each keyword to its article set.
struct KeywordIndex {
  std::vector<std::pair<std::string, std::size_t>> keywords;
  std::map<std::string, std::set<std::string>> postings;

  bool contains(const std::string& keyword) const {
    return postings.count(keyword) > 0;
  }
};

inline KeywordIndex select_keywords(const std::map<std::string, Article>& catalog,
                                    const Tokenizer& tokenizer,
                                    const StopwordList& stopwords,
                                    std::size_t top_n) {
  if (top_n == 0) throw ConfigError("top_n must be >= 1");

  std::map<std::string, std::set<std::string>> postings;
  for (const auto& [id, article] : catalog) {
    std::set<std::string> seen;
    for (std::string& token : tokenizer(article.title)) {
      if (stopwords.contains(token)) continue;
      if (seen.insert(token).second) postings[token].insert(id);
    }
  }

  std::vector<std::pair<std::string, std::size_t>> ranked;
  ranked.reserve(postings.size());
  for (const auto& [token, ids] : postings) ranked.emplace_back(token, ids.size());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);

  KeywordIndex index;
  index.keywords = std::move(ranked);
  for (const auto& [token, freq] : index.keywords)
    index.postings.emplace(token, std::move(postings.at(token)));
  return index;
}

inline const std::set<std::string>& articles_for_keyword(
    const KeywordIndex& index, const std::string& keyword) {
  auto it = index.postings.find(keyword);
  if (it == index.postings.end())
    throw UnknownKeywordError("keyword not in index: '" + keyword + "'");
  return it->second;
}

}  // namespace biaslens
