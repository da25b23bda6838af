#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mwss::data {

inline constexpr int kSchemaVersion = 1;

struct NewsArticle {
  std::string id;
  std::string text;
  std::optional<int> label;  // 1 fake, 0 real; absent for unlabeled news
};

struct Engagement {
  std::string news_id;
  std::string user_id;
  std::string text;
  std::int64_t timestamp = 0;
};

struct UserProfile {
  std::string id;
  std::vector<std::string> history;
  std::vector<double> meta;  // clustering features
};

struct Corpus {
  std::vector<NewsArticle> news;
  std::vector<Engagement> engagements;
  std::vector<UserProfile> users;

  /// Unique ids, labels in {0,1}, and every engagement pointing at known news and users.
  /// Throws ValidationError listing the offending ids.
  void validate() const;
};

struct CorpusPaths {
  std::filesystem::path news;
  std::filesystem::path engagements;
  std::filesystem::path users;

  static CorpusPaths in(const std::filesystem::path& dir);
};

/// Line-delimited JSON; the first line of each file is a header
/// {"schema": "mwss.<kind>", "version": 1, ...}. Malformed lines are reported
/// with their line number.
Corpus load_corpus(const CorpusPaths& paths);
void save_corpus(const Corpus& corpus, const CorpusPaths& paths, const std::string& manifest);

struct LabeledId {
  std::string id;
  int label = 0;
};

/// Hidden ground truth for every news item of a synthetic corpus.
std::vector<LabeledId> load_truth(const std::filesystem::path& path);
void save_truth(const std::vector<LabeledId>& truth, const std::filesystem::path& path, const std::string& manifest);

}  // namespace mwss::data
