#include "mwss/splits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "mwss/errors.hpp"
#include "mwss/rng.hpp"

namespace mwss::data {
namespace {

void sort_by_id(std::vector<LabeledId>& items) {
  std::sort(items.begin(), items.end(), [](const LabeledId& a, const LabeledId& b) { return a.id < b.id; });
}

// Splits `total` over classes in proportion to their sizes (largest remainder).
std::array<std::size_t, 2> apportion(std::size_t total, const std::array<std::size_t, 2>& sizes) {
  const double n = static_cast<double>(sizes[0] + sizes[1]);
  std::array<std::size_t, 2> out{};
  std::array<double, 2> frac{};
  std::size_t given = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[c]) / n;
    out[c] = static_cast<std::size_t>(std::floor(exact));
    frac[c] = exact - std::floor(exact);
    given += out[c];
  }
  for (std::size_t left = total - given; left > 0; --left) {
    const int c = frac[1] > frac[0] ? 1 : 0;
    ++out[c];
    frac[c] = -1.0;
  }
  return out;
}

}  // namespace

CleanSplit split_clean(std::vector<LabeledId> clean, std::uint64_t seed) {
  if (clean.size() < 20) {
    throw ValidationError("split needs at least 20 clean items, got " + std::to_string(clean.size()));
  }
  sort_by_id(clean);
  std::array<std::vector<LabeledId>, 2> by_class;
  for (auto& c : clean) {
    if (c.label != 0 && c.label != 1) throw ValidationError("clean item " + c.id + " has a label outside {0,1}");
    by_class[c.label].push_back(std::move(c));
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ValidationError(std::string("split needs both classes; no ") + (by_class[0].empty() ? "real" : "fake") +
                          " items");
  }
  const std::array<std::size_t, 2> sizes{by_class[0].size(), by_class[1].size()};
  const auto n = static_cast<double>(clean.size());
  const auto val = apportion(static_cast<std::size_t>(std::llround(kValShare * n)), sizes);
  const auto test = apportion(static_cast<std::size_t>(std::llround(kTestShare * n)), sizes);

  Rng rng = Rng(seed).fork(7);
  CleanSplit out;
  for (int c = 0; c < 2; ++c) {
    auto& items = by_class[c];
    rng.shuffle(std::span(items));
    std::size_t i = 0;
    for (; i < test[c]; ++i) out.test.push_back(items[i]);
    for (; i < test[c] + val[c]; ++i) out.val.push_back(items[i]);
    for (; i < items.size(); ++i) out.train.push_back(items[i]);
  }
  sort_by_id(out.train);
  sort_by_id(out.val);
  sort_by_id(out.test);
  return out;
}

std::size_t clean_count_for_ratio(std::size_t weak_count, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("clean ratio must lie in (0, 1)");
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(weak_count) / (1.0 - ratio)));
}

std::vector<LabeledId> mix_by_clean_ratio(const std::vector<LabeledId>& clean_train, std::size_t weak_count,
                                          double ratio, std::uint64_t seed) {
  const std::size_t need = clean_count_for_ratio(weak_count, ratio);
  std::vector<LabeledId> all = clean_train;
  sort_by_id(all);
  if (need == all.size()) return all;
  if (need > all.size()) {
    throw ValidationError("clean ratio " + std::to_string(ratio) + " needs " + std::to_string(need) +
                          " clean training items, only " + std::to_string(all.size()) + " available");
  }
  std::array<std::vector<LabeledId>, 2> by_class;
  for (const auto& c : all) by_class[c.label == 1 ? 1 : 0].push_back(c);

  // Half per class; a class that runs short is topped up from the other.
  std::array<std::size_t, 2> take{need - need / 2, need / 2};
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    if (take[c] > by_class[c].size()) {
      take[o] += take[c] - by_class[c].size();
      take[c] = by_class[c].size();
    }
  }
  Rng rng = Rng(seed).fork(8);
  std::vector<LabeledId> out;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span(by_class[c]));
    out.insert(out.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  sort_by_id(out);
  return out;
}

void assert_no_leak(std::span<const LabeledId> test, std::span<const std::string> weak_ids) {
  std::unordered_set<std::string> held_out;
  for (const auto& t : test) held_out.insert(t.id);
  std::vector<std::string> leaked;
  for (const auto& w : weak_ids) {
    if (held_out.contains(w)) leaked.push_back(w);
  }
  if (leaked.empty()) return;
  std::sort(leaked.begin(), leaked.end());
  leaked.erase(std::unique(leaked.begin(), leaked.end()), leaked.end());
  std::string msg = "weak data contains " + std::to_string(leaked.size()) + " test news id(s): " + leaked.front();
  if (leaked.size() > 1) msg += ", ...";
  throw LeakGuardError(msg);
}

}  // namespace mwss::data
