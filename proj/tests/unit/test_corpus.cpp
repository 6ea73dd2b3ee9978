#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "dcs/corpus.hpp"
#include "dcs/error.hpp"
#include "dcs/lexicon.hpp"
#include "oracle.hpp"

using namespace dcs;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FixtureRow {
  bool retained;
  std::string sentence;
};

std::vector<FixtureRow> filter_fixture() {
  std::ifstream in(std::filesystem::path(DCS_FIXTURE_DIR) / "filter_sentences.tsv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  std::vector<FixtureRow> rows;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    rows.push_back({line.substr(0, tab) == "1", line.substr(tab + 1)});
  }
  return rows;
}

std::vector<std::string> all_indicators() {
  const auto& d = FilterDictionary::defaults();
  auto v = d.indicator_terms_a1;
  v.insert(v.end(), d.indicator_terms_b1.begin(), d.indicator_terms_b1.end());
  return v;
}

std::vector<std::string> all_directions() {
  const auto& d = FilterDictionary::defaults();
  auto v = d.directional_terms_a2;
  v.insert(v.end(), d.directional_terms_b2.begin(), d.directional_terms_b2.end());
  return v;
}

/// Random sentence mixing dictionary terms, near misses and filler words,
/// with random casing and punctuation between words.
std::string random_sentence(std::mt19937_64& gen) {
  static const std::vector<std::string> filler{
      "the", "committee", "noted", "that", "conditions", "were", "mixed", "interest", "rates",
      "fundamental", "pricing", "employer", "unemployed", "growths", "ratings", "jobless",
      "market", "bank", "rate", "inflationary", "declines", "lowered", "rapidly", "risen",
      "non", "accelerating", "e\xc3\xa9" "conomie", "inflaci\xc3\xb3n", "prices", "2.5", "percent"};
  auto ind = all_indicators();
  auto dir = all_directions();
  std::uniform_int_distribution<int> len(1, 9);
  std::uniform_int_distribution<int> kind(0, 9);
  static const std::vector<std::string> seps{" ", "  ", ", ", "-", " (", ") ", "/", " \"", "' "};
  std::string s;
  const int n = len(gen);
  for (int i = 0; i < n; ++i) {
    std::string w;
    const int k = kind(gen);
    if (k == 0) w = ind[gen() % ind.size()];
    else if (k == 1) w = dir[gen() % dir.size()];
    else w = filler[gen() % filler.size()];
    if (gen() % 4 == 0)
      for (auto& c : w)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (gen() % 5 == 0) w += "s";
    if (i > 0) s += seps[gen() % seps.size()];
    s += w;
  }
  return s;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("tokenize lowercases and splits on non-word bytes") {
  CHECK(tokenize("Interest-Rate, 2.5%") == std::vector<std::string>{"interest", "rate", "2", "5"});
  CHECK(tokenize("Inflaci\xc3\xb3n") == std::vector<std::string>{"inflaci\xc3\xb3n"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("default dictionary holds the four panels in lowercase") {
  const auto& d = FilterDictionary::defaults();
  CHECK(d.indicator_terms_a1.size() == 8);
  CHECK(d.directional_terms_a2.size() == 18);
  CHECK(d.indicator_terms_b1.size() == 8);
  CHECK(d.directional_terms_b2.size() == 12);
  for (const auto* panel : {&d.indicator_terms_a1, &d.directional_terms_a2, &d.indicator_terms_b1,
                            &d.directional_terms_b2})
    for (const auto& t : *panel)
      for (char c : t) CHECK_FALSE((c >= 'A' && c <= 'Z'));
}

TEST_CASE("filter examples") {
  CHECK(filter_sentences("Inflation rose rapidly this quarter.") ==
        std::vector<std::string>{"Inflation rose rapidly this quarter."});
  CHECK(filter_sentences("Voting for the monetary policy action were all members.").empty());
  CHECK(filter_sentences("").empty());
}

TEST_CASE("stems match as token prefixes") {
  const SentenceFilter f(FilterDictionary::defaults());
  CHECK(f.retains("Prices were declining."));
  CHECK(f.retains("EMPLOYMENT GROWTH SLOWED"));
  CHECK_FALSE(f.retains("Prices were undeclining."));       // "declin" must open the word
  CHECK(f.retains("Interest  rates were cut."));              // multi-word term, extra space
  CHECK_FALSE(f.retains("Interest payments were cut."));      // "interest" alone is no term
  CHECK(f.retains("Inflation was non-accelerating."));
  CHECK(f.retains("Inflation was non accelerating."));        // hyphen and space both separate
  CHECK_FALSE(f.retains("Inflation was nonaccelerating."));
}

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("Rates rose. Prices fell; jobs grew? Yes! done") ==
        std::vector<std::string>{"Rates rose.", "Prices fell;", "jobs grew?", "Yes!", "done"});
  CHECK(split_sentences("Inflation ran at 2.5 percent.") ==
        std::vector<std::string>{"Inflation ran at 2.5 percent."});
  CHECK(split_sentences("a.\nb.") == std::vector<std::string>{"a.", "b."});
  CHECK(split_sentences("   ").empty());
}

TEST_CASE("filter golden fixture reproduces every retain/drop label") {
  const auto rows = filter_fixture();
  REQUIRE(rows.size() == 200);
  const SentenceFilter f(FilterDictionary::defaults());
  std::size_t kept = 0;
  for (const auto& r : rows) {
    INFO(r.sentence);
    CHECK(f.retains(r.sentence) == r.retained);
    kept += r.retained;
  }
  CHECK(kept > 20);
  CHECK(kept < 180);
}

TEST_CASE("property: retains agrees with a brute-force regex matcher") {
  const SentenceFilter f(FilterDictionary::defaults());
  const auto ind = all_indicators();
  const auto dir = all_directions();
  for (const auto& r : filter_fixture()) CHECK(oracle::brute_force_retains(r.sentence, ind, dir) == r.retained);
  std::mt19937_64 gen(101);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_sentence(gen);
    INFO(s);
    REQUIRE(f.retains(s) == oracle::brute_force_retains(s, ind, dir));
  }
}

TEST_CASE("property: filtering is idempotent") {
  const auto rows = filter_fixture();
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(gen() % 12);
    for (int i = 0; i < n; ++i) {
      if (i > 0) text += gen() % 2 ? " " : "\n";
      text += rows[gen() % rows.size()].sentence;
    }
    const auto once = filter_sentences(text);
    std::string joined;
    for (std::size_t i = 0; i < once.size(); ++i) joined += (i ? " " : "") + once[i];
    CHECK(filter_sentences(joined) == once);
  }
}

TEST_CASE("builtin templates equal the golden files byte for byte") {
  const std::filesystem::path dir(DCS_TEMPLATE_DIR);
  CHECK(PromptTemplates::builtin().absolute == read_file(dir / "absolute.txt"));
  CHECK(PromptTemplates::builtin().relative == read_file(dir / "relative.txt"));
  const auto loaded = PromptTemplates::load(dir);
  CHECK(loaded.absolute == PromptTemplates::builtin().absolute);
  CHECK(loaded.relative == PromptTemplates::builtin().relative);
  CHECK_THROWS_AS(PromptTemplates::load(dir / "missing"), IoError);
}

namespace {

Statement statement(std::string id, Date date, std::string text) {
  Statement s{std::move(id), date, std::move(text), {}};
  s.sentences = filter_sentences(s.raw_text);
  return s;
}

std::string replace_once(std::string tmpl, const std::string& key, const std::string& value) {
  const auto p = tmpl.find(key);
  REQUIRE(p != std::string::npos);
  return tmpl.replace(p, key.size(), value);
}

}  // namespace

TEST_CASE("build_prompts for first and later meetings") {
  const auto a = statement("m1", Date(2003, 1, 29), "Inflation rose rapidly. Members voted.");
  const auto b = statement("m2", Date(2003, 3, 18), "Employment growth slowed. Housing was flat.");
  const auto& t = PromptTemplates::builtin();

  const auto first = build_prompts(nullptr, a);
  CHECK_FALSE(first.relative_prompt.has_value());
  CHECK(first.absolute_prompt == replace_once(t.absolute, "{text}", "Inflation rose rapidly."));

  const auto second = build_prompts(&a, b);
  REQUIRE(second.relative_prompt.has_value());
  const auto& rel = *second.relative_prompt;
  CHECK(rel == replace_once(replace_once(t.relative, "{prev}", a.filtered_text()), "{curr}",
                            b.filtered_text()));
  CHECK(rel.find("Previous statement:") < rel.find("Current statement:"));
  CHECK(rel.find(a.filtered_text()) < rel.find(b.filtered_text()));
  CHECK(second.absolute_prompt.find("Output exactly one token.") != std::string::npos);
}

TEST_CASE("build_prompts rejects misordered and empty statements") {
  const auto a = statement("m1", Date(2003, 1, 29), "Inflation rose rapidly.");
  const auto same = statement("m2", Date(2003, 1, 29), "Prices fell.");
  const auto earlier = statement("m0", Date(2002, 12, 10), "Prices fell.");
  CHECK_THROWS_AS(build_prompts(&a, same), OrderingError);
  CHECK_THROWS_AS(build_prompts(&a, earlier), OrderingError);
  const auto empty = statement("m3", Date(2003, 5, 6), "Members voted.");
  CHECK_THROWS_AS(build_prompts(nullptr, empty), ValidationError);
}

TEST_CASE("placeholder text inside a statement is not substituted again") {
  const auto a = statement("m1", Date(2003, 1, 29), "Inflation {prev} rose rapidly.");
  const auto b = statement("m2", Date(2003, 3, 18), "Prices {curr} {text} fell.");
  const auto p = build_prompts(&a, b);
  CHECK(p.absolute_prompt.find("Prices {curr} {text} fell.") != std::string::npos);
  const auto [prev, curr] = parse_relative_prompt(*p.relative_prompt);
  CHECK(prev == "Inflation {prev} rose rapidly.");
  CHECK(curr == "Prices {curr} {text} fell.");
}

TEST_CASE("property: relative prompts invert to both statement texts") {
  const auto rows = filter_fixture();
  std::vector<std::string> kept;
  for (const auto& r : rows)
    if (r.retained) kept.push_back(r.sentence);
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto pick = [&] {
      std::string text;
      const int n = 1 + static_cast<int>(gen() % 5);
      for (int i = 0; i < n; ++i) text += (i ? " " : "") + kept[gen() % kept.size()];
      if (gen() % 3 == 0) text += " {prev}{curr}";
      return text;
    };
    const auto a = statement("a", Date(2010, 1, 1), pick());
    const auto b = statement("b", Date(2010, 2, 1), pick());
    const auto p = build_prompts(&a, b);
    const auto [prev, curr] = parse_relative_prompt(*p.relative_prompt);
    CHECK(prev == a.filtered_text());
    CHECK(curr == b.filtered_text());
  }
  CHECK_THROWS_AS(parse_relative_prompt("not a prompt"), ValidationError);
}

TEST_CASE("parse_corpus sorts by date and filters sentences") {
  std::istringstream in(
      R"({"meeting_id": "b", "date": "2004-03-16", "text": "Prices fell. Members voted."})"
      "\n\n"
      R"({"meeting_id": "a", "date": "2004-01-28", "text": "Inflation rose rapidly."})"
      "\n");
  const auto c = parse_corpus(in);
  REQUIRE(c.size() == 2);
  CHECK(c[0].meeting_id == "a");
  CHECK(c[1].meeting_id == "b");
  CHECK(c[1].sentences == std::vector<std::string>{"Prices fell."});
  CHECK(c[1].filtered_text() == "Prices fell.");
}

TEST_CASE("parse_corpus errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in);
  };
  CHECK_THROWS_AS(parse("{\"meeting_id\":\"a\",\"date\":\"2004-01-28\",\"text\":\"x\"}\n"
                        "{\"meeting_id\":\"a\",\"date\":\"2004-03-16\",\"text\":\"y\"}\n"),
                  ConflictError);
  CHECK_THROWS_AS(parse("{\"meeting_id\":\"a\",\"date\":\"2004-01-28\",\"text\":\"x\"}\n"
                        "{\"meeting_id\":\"b\",\"date\":\"2004-01-28\",\"text\":\"y\"}\n"),
                  ConflictError);
  try {
    parse("{\"meeting_id\":\"a\",\"date\":\"2004-01-28\",\"text\":\"x\"}\n{oops\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("{\"meeting_id\":\"a\",\"text\":\"x\"}\n"), ParseError);
  CHECK_THROWS_AS(parse("{\"meeting_id\":\"a\",\"date\":\"2004-13-01\",\"text\":\"x\"}\n"), ParseError);
  CHECK_THROWS_AS(parse("[1,2]\n"), ParseError);
  CHECK(parse("").empty());
}

TEST_CASE("corpus files round-trip") {
  const auto dir = oracle::temp_dir("corpus_roundtrip");
  std::vector<Statement> c{statement("x1", Date(2005, 2, 2), "Inflation rose \"rapidly\".\nDone."),
                           statement("x2", Date(2005, 3, 22), "Caf\xc3\xa9 prices fell.")};
  write_corpus(dir / "c.ndjson", c);
  const auto back = load_corpus(dir / "c.ndjson");
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].meeting_id == c[i].meeting_id);
    CHECK(back[i].date == c[i].date);
    CHECK(back[i].raw_text == c[i].raw_text);
    CHECK(back[i].sentences == c[i].sentences);
  }
  CHECK_THROWS_AS(load_corpus(dir / "absent.ndjson"), IoError);
}

TEST_CASE("dates") {
  CHECK(Date::parse("2008-12-16").iso() == "2008-12-16");
  CHECK(Date::parse("2000-02-29").day() == 29);
  CHECK_THROWS_AS(Date::parse("2001-02-29"), ValidationError);
  CHECK_THROWS_AS(Date::parse("2001-2-09"), ValidationError);
  CHECK_THROWS_AS(Date::parse("2001-02-09x"), ValidationError);
  CHECK(Date(1970, 1, 2).days() == 1);
  CHECK(Date(2003, 1, 28) < Date(2003, 3, 18));
}

}  // TEST_SUITE
