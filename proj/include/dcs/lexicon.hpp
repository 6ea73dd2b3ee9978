#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dcs {

/// Lowercased word tokens of `text`. A word is a maximal run of ASCII
/// letters/digits or non-ASCII bytes; everything else separates words.
std::vector<std::string> tokenize(std::string_view text);

/// A list of stem terms matched against tokenized text.
///
/// Each term is split into words with the same tokenizer. A term matches at
/// token position i when every term word is a prefix of the token at the
/// corresponding position, so "declin" matches "declining" and "fund rate"
/// matches "funds rate". Hyphenated terms ("non-accelerating") become
/// multi-word terms, consistent with how the text is split.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> terms);

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  bool matches(const std::vector<std::string>& tokens) const;
  bool matches(std::string_view text) const { return matches(tokenize(text)); }

  /// Number of (term, start position) matches.
  std::size_t count(const std::vector<std::string>& tokens) const;
  std::size_t count(std::string_view text) const { return count(tokenize(text)); }

 private:
  bool matches_at(const std::vector<std::string>& term, const std::vector<std::string>& tokens,
                  std::size_t pos) const;

  std::vector<std::string> terms_;
  std::vector<std::vector<std::string>> words_;
};

}  // namespace dcs
