#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcs/date.hpp"
#include "dcs/lexicon.hpp"

namespace dcs {

/// One FOMC meeting. `sentences` holds the policy-relevant sentences of
/// `raw_text` in their original order.
struct Statement {
  std::string meeting_id;
  Date date;
  std::string raw_text;
  std::vector<std::string> sentences;

  /// Retained sentences joined by single spaces; the text embedded in prompts.
  std::string filtered_text() const;
};

/// Four-panel indicator/direction dictionary. A sentence is policy relevant
/// when it hits an indicator panel (A1 or B1) and a directional panel (A2 or B2).
struct FilterDictionary {
  std::vector<std::string> indicator_terms_a1;
  std::vector<std::string> directional_terms_a2;
  std::vector<std::string> indicator_terms_b1;
  std::vector<std::string> directional_terms_b2;

  static const FilterDictionary& defaults();
};

/// Compiled form of a FilterDictionary.
class SentenceFilter {
 public:
  explicit SentenceFilter(const FilterDictionary& dict = FilterDictionary::defaults());

  bool retains(std::string_view sentence) const;

 private:
  Lexicon indicators_;
  Lexicon directions_;
};

/// Splits on `.`, `;`, `?` or `!` followed by whitespace. The delimiter stays
/// with its sentence; surrounding whitespace is trimmed and empty pieces dropped.
std::vector<std::string> split_sentences(std::string_view text);

std::vector<std::string> filter_sentences(std::string_view raw_text,
                                          const FilterDictionary& dict = FilterDictionary::defaults());
std::vector<std::string> filter_sentences(std::string_view raw_text, const SentenceFilter& filter);

struct PromptTemplates {
  std::string absolute;  // contains {text}
  std::string relative;  // contains {prev} then {curr}

  static const PromptTemplates& builtin();
  /// Reads `absolute.txt` and `relative.txt` from `dir`.
  static PromptTemplates load(const std::filesystem::path& dir);
};

struct PromptPair {
  std::string absolute_prompt;
  std::optional<std::string> relative_prompt;
};

/// Single-pass placeholder substitution; braces inside substituted text are left alone.
PromptPair build_prompts(const Statement* prev, const Statement& curr,
                         const PromptTemplates& templates = PromptTemplates::builtin());

/// Inverse of the relative template: recovers (prev, curr) texts.
std::pair<std::string, std::string> parse_relative_prompt(
    std::string_view prompt, const PromptTemplates& templates = PromptTemplates::builtin());

/// NDJSON, one `{"meeting_id", "date", "text"}` object per line. Returns the
/// statements sorted by date with sentences filtered.
std::vector<Statement> load_corpus(const std::filesystem::path& path,
                                   const FilterDictionary& dict = FilterDictionary::defaults());
std::vector<Statement> parse_corpus(std::istream& in,
                                    const FilterDictionary& dict = FilterDictionary::defaults());

void write_corpus(const std::filesystem::path& path, const std::vector<Statement>& corpus);

}  // namespace dcs
