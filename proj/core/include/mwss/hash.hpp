#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mwss {

// 64-bit FNV-1a. Stable across platforms; used for token hashing and content digests.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t v);

}  // namespace mwss
