#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mwss/corpus.hpp"

namespace mwss::data {

struct CleanSplit {
  std::vector<LabeledId> train;
  std::vector<LabeledId> val;
  std::vector<LabeledId> test;
};

inline constexpr double kValShare = 0.15;
inline constexpr double kTestShare = 0.10;

/// Stratified train/validation/test split. Validation and test totals are
/// round(share * n); each class receives its proportional part, remainders
/// going to the classes with the largest fractional parts. Every part is
/// sorted by id. Needs at least 20 items and both classes present.
CleanSplit split_clean(std::vector<LabeledId> clean, std::uint64_t seed);

/// Clean items needed so that clean / (clean + weak) = ratio: round(ratio * weak / (1 - ratio)).
std::size_t clean_count_for_ratio(std::size_t weak_count, double ratio);

/// Class-balanced subsample of the clean training items for the given ratio.
/// A count at or above the available items returns all of them. The result is sorted by id.
std::vector<LabeledId> mix_by_clean_ratio(const std::vector<LabeledId>& clean_train, std::size_t weak_count,
                                          double ratio, std::uint64_t seed);

/// Throws LeakGuardError when any weak id belongs to the test split.
void assert_no_leak(std::span<const LabeledId> test, std::span<const std::string> weak_ids);

}  // namespace mwss::data
