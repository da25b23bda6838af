#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mwss/config.hpp"
#include "mwss/splits.hpp"
#include "mwss/trainer.hpp"
#include "mwss/weak_labels.hpp"

namespace mwss::harness {

enum class Method { mwss, clean, weak, merged, majority };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

/// A corpus with its weak sets, split and tokenized for training.
struct Experiment {
  RunConfig config;
  data::CleanSplit split;
  std::vector<model::Example> train_pool;  // the whole clean training split
  std::vector<model::Example> val;
  std::vector<model::Example> test;
  std::vector<std::vector<model::Example>> weak;  // one per config.sources entry
  std::size_t weak_count = 0;                     // distinct weakly labeled news
  std::vector<std::pair<std::string, std::string>> inputs;  // file name, content digest
};

/// Loads corpus_dir/{news,engagements,users}.jsonl and weak_dir/weak_<source>.jsonl.
/// Throws LeakGuardError if a weak set touches the test split.
Experiment load_experiment(const RunConfig& config, const std::filesystem::path& corpus_dir,
                           const std::filesystem::path& weak_dir);

struct RunOutcome {
  Method method = Method::mwss;
  std::uint64_t seed = 0;
  double ratio = 0.0;  // 0 when the whole clean training split was used
  std::size_t clean_used = 0;
  model::ModelSpec spec;
  meta::TrainResult result;
  meta::MetricsReport test;
  std::vector<double> mean_weight;  // mwss only: mean ω over each full weak set
};

/// Trains one method. `ratio` overrides the configured clean ratio.
RunOutcome run_method(const Experiment& exp, Method method, std::uint64_t seed,
                      std::optional<double> ratio = std::nullopt);

/// Content digest of a file (FNV-1a, hex).
std::string file_digest(const std::filesystem::path& path);

// Commands. Each writes its outputs plus manifest.json into `out`.

void cmd_synth(const RunConfig& config, const std::filesystem::path& out);

struct ThresholdRow {
  weak::Source source;
  weak::ThresholdFit fit;
};

struct WeaklabelReport {
  weak::LabelingResult labeling;
  std::vector<ThresholdRow> fitted;  // empty unless fitting was requested
};

/// With `fit`, thresholds are fitted on the clean training split first.
WeaklabelReport cmd_weaklabel(const RunConfig& config, const std::filesystem::path& corpus_dir,
                              const std::filesystem::path& out, bool fit);

RunOutcome cmd_train(const RunConfig& config, const std::filesystem::path& corpus_dir,
                     const std::filesystem::path& weak_dir, Method method, const std::filesystem::path& out);

struct SweepRow {
  Method method = Method::mwss;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  bool skipped = false;
  std::string reason;
  std::size_t clean_used = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<double> mean_weight;  // mwss rows only
};

/// Rows sorted by (method, ratio, seed) whatever the number of jobs.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, const std::filesystem::path& corpus_dir,
                                const std::filesystem::path& weak_dir, const std::vector<double>& ratios,
                                const std::vector<std::uint64_t>& seeds, const std::vector<Method>& methods,
                                std::size_t jobs, const std::filesystem::path& out);

inline constexpr std::size_t kWeightBins = 50;

struct WeightHistogram {
  std::string source;  // a weak source, or "clean"
  std::vector<std::size_t> bins;
  std::size_t count = 0;
  double mean = 0.0;
};

/// ω of every weak instance under the checkpoint's LWN, binned over [0, 1].
/// The clean row scores the clean training news paired with their own labels.
/// A given config must hash to the checkpoint's.
std::vector<WeightHistogram> cmd_weights(const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& corpus_dir,
                                         const std::filesystem::path& weak_dir, const RunConfig* config,
                                         const std::filesystem::path& out);

}  // namespace mwss::harness
