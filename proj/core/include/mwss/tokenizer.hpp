#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mwss::text {

inline constexpr std::uint32_t kPadId = 0;

struct TokenizerConfig {
  std::size_t max_length = 256;
  std::size_t vocab_size = std::size_t{1} << 15;  // hash buckets, id 0 reserved for padding
  bool lowercase = true;

  void validate() const;
};

using TokenIds = std::vector<std::uint32_t>;

/// Splits text into word segments: maximal runs of ASCII letters/digits,
/// apostrophes inside words, and any non-ASCII byte (so UTF-8 letters stay
/// inside words). ASCII is lowercased when requested.
std::vector<std::string> split_words(std::string_view text, bool lowercase = true);

/// Hash bucket of a single word, in [1, vocab_size).
std::uint32_t token_id(std::string_view word, std::size_t vocab_size);

/// Exactly max_length ids: the first max_length words, then padding.
TokenIds tokenize(std::string_view text, const TokenizerConfig& config);

/// Number of leading non-pad ids.
std::size_t content_length(const TokenIds& ids);

}  // namespace mwss::text
