#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwss/corpus.hpp"

namespace mwss::weak {

enum class Source { sentiment, bias, credibility };

inline constexpr std::array<Source, 3> kAllSources{Source::sentiment, Source::bias, Source::credibility};

std::string_view to_string(Source s);
Source parse_source(std::string_view name);

/// A labeling function's verdict on one news item. Abstention is not a label.
enum class Vote : std::int8_t { abstain = -1, real = 0, fake = 1 };

// ---------------------------------------------------------------- sentiment

/// Token valences in [-1, 1] plus negation tokens. Unknown tokens score 0.
///
/// File format: one "token<TAB>valence" per line; a valence of NEG marks a
/// negation token; lines starting with '#' are comments.
class Lexicon {
 public:
  void set(std::string token, double valence);
  void add_negation(std::string token);

  /// 0 for unknown tokens.
  double valence(std::string_view token) const;
  bool contains(std::string_view token) const;
  bool is_negation(std::string_view token) const;
  std::size_t size() const { return valences_.size(); }

  static Lexicon load(const std::filesystem::path& path);
  /// The first line is a comment carrying the manifest hash when one is given.
  void save(const std::filesystem::path& path, const std::string& manifest = "") const;

 private:
  std::map<std::string, double, std::less<>> valences_;
  std::set<std::string, std::less<>> negations_;
};

inline constexpr std::size_t kNegationWindow = 3;

/// Mean valence of lexicon tokens; a token within three tokens after a
/// negation has its valence flipped. 0 when nothing matches.
double sentiment_score(std::string_view text, const Lexicon& lexicon);

/// Population standard deviation; absent for fewer than two scores.
std::optional<double> sentiment_spread(std::span<const double> scores);

/// Fake iff the spread exceeds tau1; abstains below two engagements.
Vote sentiment_label(std::span<const double> scores, double tau1 = 0.15);

// --------------------------------------------------------------------- bias

/// Token frequency profile, normalized to sum 1.
using InterestProfile = std::map<std::string, double, std::less<>>;

InterestProfile build_profile(std::span<const std::string> texts);
double cosine(const InterestProfile& a, const InterestProfile& b);

struct SeedInterestSets {
  InterestProfile left;
  InterestProfile right;
  std::vector<std::string> left_users;
  std::vector<std::string> right_users;

  /// Builds both profiles from the history of the listed seed users.
  static SeedInterestSets from_users(const data::Corpus& corpus, std::vector<std::string> left_users,
                                     std::vector<std::string> right_users);
  static SeedInterestSets load(const std::filesystem::path& path, const data::Corpus& corpus);
  void save(const std::filesystem::path& path, const std::string& manifest) const;
  void validate() const;
};

/// cos(profile, right) − cos(profile, left), clipped to [-1, 1]. Empty history scores 0.
double bias_score(std::span<const std::string> history, const SeedInterestSets& seeds);

/// Fake iff the mean absolute bias of the engaging users exceeds tau2; abstains with no users.
Vote bias_label(std::span<const double> scores, double tau2 = 0.5);

// -------------------------------------------------------------- credibility

/// Average-linkage agglomerative clustering on Euclidean distance; merging
/// stops once the next merge would exceed `cut`. Returns a cluster id per
/// point (ids are dense, in order of first appearance).
std::vector<std::size_t> cluster_users(std::span<const std::vector<double>> features, double cut);

/// 1 / |cluster| for every user.
std::vector<double> credibility_scores(std::span<const std::vector<double>> features, double cut);

/// Fake iff the mean credibility of the engaging users is below tau3; abstains with no users.
Vote credibility_label(std::span<const double> credibilities, double tau3 = 0.125);

// --------------------------------------------------------- threshold fitting

/// Whether a labeling function fires above or below its threshold.
enum class FireWhen { above, below };

FireWhen fire_direction(Source s);

struct ThresholdFit {
  double tau = 0.0;
  double accuracy = 0.0;
  bool degenerate = false;
};

inline constexpr double kThresholdGridStep = 0.005;

/// Grid search over [0, 1] in steps of 0.005 for the accuracy-maximizing
/// threshold; ties go to the smallest. Needs at least ten items.
ThresholdFit fit_threshold(std::span<const double> statistics, std::span<const int> labels, FireWhen when);

// ---------------------------------------------------------------- pipeline

struct Thresholds {
  double sentiment = 0.15;
  double bias = 0.5;
  double credibility = 0.125;

  double of(Source s) const;
  void set(Source s, double v);
};

struct LabelingConfig {
  Lexicon lexicon;
  SeedInterestSets seeds;
  Thresholds thresholds;
  double cluster_cut = 1.0;
};

/// Per-news statistics each labeling function thresholds. Absent = abstain.
struct NewsStatistics {
  std::string news_id;
  std::optional<double> sentiment_spread;
  std::optional<double> bias_mean_abs;
  std::optional<double> credibility_mean;

  std::optional<double> of(Source s) const;
};

/// Sorted by news id.
std::vector<NewsStatistics> compute_statistics(const data::Corpus& corpus, const LabelingConfig& config);

Vote vote_for(Source s, const NewsStatistics& stats, const Thresholds& thresholds);

struct WeakInstance {
  std::string news_id;
  int label = 0;
};

struct SourceQuality {
  Source source = Source::sentiment;
  std::string scope;  // "clean" against annotated labels, "truth" against hidden synthetic truth
  double accuracy = 0.0;
  double f1 = 0.0;
  double coverage = 0.0;  // share of scoped news the function did not abstain on
  std::size_t evaluated = 0;
};

struct WeakLabeledSet {
  Source source = Source::sentiment;
  double threshold = 0.0;
  std::vector<WeakInstance> instances;  // sorted by news id
  std::optional<SourceQuality> quality;
};

struct LabelingResult {
  std::vector<WeakLabeledSet> sets;  // one per source, in kAllSources order
  std::vector<SourceQuality> quality;
  std::size_t news_without_engagements = 0;
};

/// Runs the three labeling functions over the corpus. Weak sets hold the
/// unlabeled news the function did not abstain on (label 1 when the rule
/// fires, 0 otherwise). Quality is measured on the clean-labeled news and,
/// when `truth` is given, on the weak sets against it.
LabelingResult apply_labeling(const data::Corpus& corpus, const LabelingConfig& config,
                              const std::vector<data::LabeledId>* truth = nullptr);

/// Fits the three thresholds on clean-labeled training news.
std::map<Source, ThresholdFit> fit_thresholds(const std::vector<NewsStatistics>& stats,
                                              const std::vector<data::LabeledId>& clean_train);

void save_weak_set(const WeakLabeledSet& set, const std::filesystem::path& path, const std::string& manifest);
WeakLabeledSet load_weak_set(const std::filesystem::path& path);

}  // namespace mwss::weak
