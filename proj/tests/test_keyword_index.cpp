#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "biaslens/keyword_index.hpp"

using namespace biaslens;

namespace {

std::map<std::string, Article> catalog_from_titles(
    const std::vector<std::string>& titles) {
  std::map<std::string, Article> catalog;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    const std::string id = "art" + std::to_string(i + 1);
    catalog[id] = Article{id, titles[i], "politics"};
  }
  return catalog;
}

}  // namespace

TEST_CASE("default tokenizer splits, lowercases and filters") {
  CHECK(default_tokenizer("Typhoon hits Kyoto hard") ==
        std::vector<std::string>{"typhoon", "hits", "kyoto", "hard"});
  CHECK(default_tokenizer("2-year-old boy rescued") ==
        std::vector<std::string>{"year", "old", "boy", "rescued"});
  CHECK(default_tokenizer("").empty());
  // single code points and pure numerics drop; mixed alphanumerics stay
  CHECK(default_tokenizer("a 42 b7") == std::vector<std::string>{"b7"});
  // non-ASCII survives verbatim, counted per code point
  CHECK(default_tokenizer("台風が近づく 政治") ==
        std::vector<std::string>{"台風が近づく", "政治"});
}

TEST_CASE("tokenizer is deterministic") {
  const std::string title = "Mother visits hospital; boy rescued!";
  CHECK(default_tokenizer(title) == default_tokenizer(title));
}

TEST_CASE("stopword list parsing skips comments and blanks") {
  std::istringstream in("# comment line\n\nthe\n  of  \n#another\nand\n");
  const auto stopwords = StopwordList::from_stream(in);
  CHECK(stopwords.size() == 3);
  CHECK(stopwords.contains("the"));
  CHECK(stopwords.contains("of"));
  CHECK(stopwords.contains("and"));
  CHECK_FALSE(stopwords.contains("# comment line"));
}

TEST_CASE("select_keywords counts document frequency with tie-breaks") {
  const auto catalog = catalog_from_titles({"aa bb", "aa cc", "aa"});

  SECTION("frequency ranking, lexicographic ties") {
    const auto index = select_keywords(catalog, default_tokenizer, StopwordList{}, 2);
    REQUIRE(index.keywords.size() == 2);
    CHECK(index.keywords[0] == std::pair<std::string, std::size_t>{"aa", 3});
    CHECK(index.keywords[1] == std::pair<std::string, std::size_t>{"bb", 1});
  }
  SECTION("stopwords removed before ranking") {
    const auto index = select_keywords(
        catalog, default_tokenizer, StopwordList{{"aa"}}, 2);
    REQUIRE(index.keywords.size() == 2);
    CHECK(index.keywords[0].first == "bb");
    CHECK(index.keywords[1].first == "cc");
  }
  SECTION("fewer distinct tokens than top_n returns all") {
    const auto index = select_keywords(catalog, default_tokenizer, StopwordList{}, 50);
    CHECK(index.keywords.size() == 3);
  }
}

TEST_CASE("repeated token in one title counts once") {
  const auto catalog = catalog_from_titles({"boy boy boy", "boy girl"});
  const auto index = select_keywords(catalog, default_tokenizer, StopwordList{}, 10);
  // document-frequency oracle: per-article token sets
  std::size_t df = 0;
  for (const auto& [id, art] : catalog) {
    const auto toks = default_tokenizer(art.title);
    if (std::find(toks.begin(), toks.end(), "boy") != toks.end()) ++df;
  }
  CHECK(df == 2);
  CHECK(index.postings.at("boy").size() == df);
  for (const auto& [kw, freq] : index.keywords)
    CHECK(freq == index.postings.at(kw).size());
}

TEST_CASE("articles_for_keyword returns postings or throws") {
  const auto catalog = catalog_from_titles({"aa bb", "aa cc", "aa"});
  const auto index = select_keywords(catalog, default_tokenizer, StopwordList{}, 10);
  const auto& arts = articles_for_keyword(index, "aa");
  CHECK(arts == std::set<std::string>{"art1", "art2", "art3"});
  CHECK_THROWS_AS(articles_for_keyword(index, "zz"), UnknownKeywordError);
}

TEST_CASE("selection is stable across reruns") {
  const auto catalog = catalog_from_titles(
      {"one two three", "two three four", "three four five", "five one"});
  const auto a = select_keywords(catalog, default_tokenizer, StopwordList{}, 3);
  const auto b = select_keywords(catalog, default_tokenizer, StopwordList{}, 3);
  CHECK(a.keywords == b.keywords);
  CHECK(a.postings == b.postings);
}

TEST_CASE("removing a stopword never increases another keyword's frequency") {
  const auto catalog = catalog_from_titles(
      {"apple banana", "apple cherry", "banana cherry apple", "date banana"});
  const auto base = select_keywords(catalog, default_tokenizer, StopwordList{}, 100);
  const auto filtered = select_keywords(
      catalog, default_tokenizer, StopwordList{{"apple"}}, 100);
  std::map<std::string, std::size_t> base_freq(base.keywords.begin(),
                                               base.keywords.end());
  for (const auto& [kw, freq] : filtered.keywords) {
    REQUIRE(base_freq.count(kw) == 1);
    CHECK(freq == base_freq.at(kw));
  }
}
