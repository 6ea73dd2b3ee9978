#include "dcs/lexicon.hpp"

#include "dcs/error.hpp"

namespace dcs {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Lexicon::Lexicon(std::vector<std::string> terms) : terms_(std::move(terms)) {
  words_.reserve(terms_.size());
  for (auto& t : terms_) {
    auto w = tokenize(t);
    if (w.empty()) throw ValidationError("lexicon term '" + t + "' contains no word characters");
    for (auto& c : t) c = lower(static_cast<unsigned char>(c));
    words_.push_back(std::move(w));
  }
}

bool Lexicon::matches_at(const std::vector<std::string>& term,
                         const std::vector<std::string>& tokens, std::size_t pos) const {
  if (pos + term.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < term.size(); ++k)
    if (!tokens[pos + k].starts_with(term[k])) return false;
  return true;
}

bool Lexicon::matches(const std::vector<std::string>& tokens) const {
  for (const auto& term : words_)
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (matches_at(term, tokens, i)) return true;
  return false;
}

std::size_t Lexicon::count(const std::vector<std::string>& tokens) const {
  std::size_t n = 0;
  for (const auto& term : words_)
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (matches_at(term, tokens, i)) ++n;
  return n;
}

}  // namespace dcs
