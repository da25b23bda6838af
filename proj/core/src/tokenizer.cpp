#include "mwss/tokenizer.hpp"

#include <algorithm>

#include "mwss/errors.hpp"
#include "mwss/hash.hpp"

namespace mwss::text {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

}  // namespace

void TokenizerConfig::validate() const {
  if (max_length == 0) throw ValidationError("tokenizer max_length must be positive");
  if (vocab_size < 2) throw ValidationError("tokenizer vocab_size must be at least 2");
  if (vocab_size > (std::size_t{1} << 31)) throw ValidationError("tokenizer vocab_size too large");
}

std::vector<std::string> split_words(std::string_view text, bool lowercase) {
  std::vector<std::string> words;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool inner_apostrophe = c == '\'' && !cur.empty() && i + 1 < text.size() &&
                                  is_word_byte(static_cast<unsigned char>(text[i + 1]));
    if (is_word_byte(c) || inner_apostrophe) {
      cur.push_back(lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::uint32_t token_id(std::string_view word, std::size_t vocab_size) {
  return static_cast<std::uint32_t>(1 + fnv1a(word) % (vocab_size - 1));
}

TokenIds tokenize(std::string_view text, const TokenizerConfig& config) {
  config.validate();
  TokenIds ids(config.max_length, kPadId);
  const auto words = split_words(text, config.lowercase);
  const std::size_t n = std::min(words.size(), config.max_length);
  for (std::size_t i = 0; i < n; ++i) ids[i] = token_id(words[i], config.vocab_size);
  return ids;
}

std::size_t content_length(const TokenIds& ids) {
  auto it = std::find(ids.begin(), ids.end(), kPadId);
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace mwss::text
