#include "dcs/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcs/error.hpp"

namespace dcs {

namespace {

constexpr std::string_view kAbsoluteTemplate =
    R"(Instruction:

Decide whether the stance is tighter (Hawkish) or looser (Dovish).

Use only stance cues, including inflation versus employment risk, forward guidance, the pace of hikes or cuts, and balance-sheet policy.

Output exactly one token.

Input statement:

{text})";

constexpr std::string_view kRelativeTemplate =
    R"(Instruction:

Compare only the stance shift from Prev to Curr.

Ignore topic changes. Focus only on whether Curr implies tighter or looser policy than Prev.

Examples of hawkish shift cues include:
higher-for-longer language, faster hikes, and stronger concern about inflation.

Examples of dovish shift cues include:
more accommodation, faster cuts, and stronger concern about employment.

Output exactly one token.

Previous statement:

{prev}

Current statement:

{curr})";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> concat(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string_view>>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool replaced = false;
    if (tmpl[i] == '{') {
      for (const auto& [key, value] : values) {
        if (tmpl.substr(i).starts_with(key)) {
          out.append(value);
          i += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(tmpl[i++]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string Statement::filtered_text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

const FilterDictionary& FilterDictionary::defaults() {
  static const FilterDictionary dict{
      {"inflation expectation", "interest rate", "bank rate", "fund rate", "price",
       "economic activity", "inflation", "employment"},
      {"anchor", "cut", "subdue", "declin", "decrease", "reduc", "low", "drop", "fall", "fell",
       "decelerat", "slow", "pause", "stable", "non-accelerating", "pausing", "downward",
       "tighten"},
      {"unemployment", "growth", "exchange rate", "productivity", "deficit", "demand",
       "job market", "monetary policy"},
      {"ease", "easing", "rise", "rising", "increase", "expand", "improv", "strong", "upward",
       "raise", "high", "rapid"},
  };
  return dict;
}

SentenceFilter::SentenceFilter(const FilterDictionary& dict)
    : indicators_(concat(dict.indicator_terms_a1, dict.indicator_terms_b1)),
      directions_(concat(dict.directional_terms_a2, dict.directional_terms_b2)) {}

bool SentenceFilter::retains(std::string_view sentence) const {
  const auto tokens = tokenize(sentence);
  return indicators_.matches(tokens) && directions_.matches(tokens);
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == ';' || c == '?' || c == '!') && is_space(text[i + 1])) {
      auto piece = trim(text.substr(start, i + 1 - start));
      if (!piece.empty()) out.emplace_back(piece);
      start = i + 1;
    }
  }
  if (start < text.size()) {
    auto piece = trim(text.substr(start));
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

std::vector<std::string> filter_sentences(std::string_view raw_text, const SentenceFilter& filter) {
  std::vector<std::string> out;
  for (auto& s : split_sentences(raw_text))
    if (filter.retains(s)) out.push_back(std::move(s));
  return out;
}

std::vector<std::string> filter_sentences(std::string_view raw_text, const FilterDictionary& dict) {
  return filter_sentences(raw_text, SentenceFilter(dict));
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates t{std::string(kAbsoluteTemplate), std::string(kRelativeTemplate)};
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t{read_file(dir / "absolute.txt"), read_file(dir / "relative.txt")};
  if (t.absolute.find("{text}") == std::string::npos)
    throw ValidationError("absolute template lacks {text}");
  const auto p = t.relative.find("{prev}");
  const auto c = t.relative.find("{curr}");
  if (p == std::string::npos || c == std::string::npos || p > c)
    throw ValidationError("relative template must contain {prev} before {curr}");
  return t;
}

PromptPair build_prompts(const Statement* prev, const Statement& curr,
                         const PromptTemplates& templates) {
  const auto curr_text = curr.filtered_text();
  if (curr_text.empty())
    throw ValidationError("statement " + curr.meeting_id + " has no policy-relevant sentences");
  PromptPair pair;
  pair.absolute_prompt = substitute(templates.absolute, {{"{text}", curr_text}});
  if (prev != nullptr) {
    if (!(prev->date < curr.date))
      throw OrderingError("previous statement " + prev->meeting_id + " (" + prev->date.iso() +
                          ") does not precede " + curr.meeting_id + " (" + curr.date.iso() + ")");
    const auto prev_text = prev->filtered_text();
    if (prev_text.empty())
      throw ValidationError("statement " + prev->meeting_id + " has no policy-relevant sentences");
    pair.relative_prompt =
        substitute(templates.relative, {{"{prev}", prev_text}, {"{curr}", curr_text}});
  }
  return pair;
}

std::pair<std::string, std::string> parse_relative_prompt(std::string_view prompt,
                                                          const PromptTemplates& templates) {
  const std::string_view tmpl = templates.relative;
  const auto p = tmpl.find("{prev}");
  const auto c = tmpl.find("{curr}");
  const auto head = tmpl.substr(0, p);
  const auto middle = tmpl.substr(p + 6, c - (p + 6));
  const auto tail = tmpl.substr(c + 6);
  if (!prompt.starts_with(head) || !prompt.ends_with(tail) ||
      prompt.size() < head.size() + middle.size() + tail.size())
    throw ValidationError("prompt does not match the relative template");
  const auto body = prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
  const auto m = body.find(middle);
  if (m == std::string_view::npos) throw ValidationError("prompt does not match the relative template");
  // Only unambiguous when the separator occurs once; prev text must not contain it.
  if (body.find(middle, m + 1) != std::string_view::npos)
    throw ValidationError("relative prompt is ambiguous: separator appears more than once");
  return {std::string(body.substr(0, m)), std::string(body.substr(m + middle.size()))};
}

std::vector<Statement> parse_corpus(std::istream& in, const FilterDictionary& dict) {
  const SentenceFilter filter(dict);
  std::vector<Statement> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", lineno);
    for (const char* key : {"meeting_id", "date", "text"})
      if (!j.contains(key) || !j[key].is_string())
        throw ParseError(std::string("missing string field '") + key + "'", lineno);
    Statement st;
    st.meeting_id = j["meeting_id"].get<std::string>();
    if (st.meeting_id.empty()) throw ParseError("empty meeting_id", lineno);
    try {
      st.date = Date::parse(j["date"].get<std::string>());
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
    st.raw_text = j["text"].get<std::string>();
    if (!ids.insert(st.meeting_id).second)
      throw ConflictError("duplicate meeting_id '" + st.meeting_id + "' at line " +
                          std::to_string(lineno));
    st.sentences = filter_sentences(st.raw_text, filter);
    out.push_back(std::move(st));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Statement& a, const Statement& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].date == out[i - 1].date)
      throw ConflictError("meetings " + out[i - 1].meeting_id + " and " + out[i].meeting_id +
                          " share date " + out[i].date.iso());
  return out;
}

std::vector<Statement> load_corpus(const std::filesystem::path& path, const FilterDictionary& dict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_corpus(in, dict);
}

void write_corpus(const std::filesystem::path& path, const std::vector<Statement>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& st : corpus) {
    nlohmann::ordered_json j;
    j["meeting_id"] = st.meeting_id;
    j["date"] = st.date.iso();
    j["text"] = st.raw_text;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace dcs
