#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwss/model.hpp"
#include "mwss/synth.hpp"
#include "mwss/tokenizer.hpp"
#include "mwss/trainer.hpp"
#include "mwss/weak_labels.hpp"

namespace mwss::harness {

/// Everything a command needs besides its paths. Stored as INI with one
/// section per module: [synth] [tokenizer] [encoder] [model] [train]
/// [labeling] [experiment].
struct RunConfig {
  data::SynthConfig synth;
  text::TokenizerConfig tokenizer;
  model::ModelSpec model;  // encoder.vocab_size follows tokenizer.vocab_size
  meta::TrainConfig train;
  weak::Thresholds thresholds;
  double cluster_cut = 1.0;
  int majority_tie = 0;

  double clean_ratio = 0.0;  // 0 uses the whole clean training split
  std::uint64_t split_seed = 0;
  std::vector<weak::Source> sources{weak::kAllSources.begin(), weak::kAllSources.end()};

  void validate() const;
};

/// Keys absent from the file keep their defaults; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& ini_text, const std::string& origin = "config");

/// Canonical INI text holding every key.
std::string to_ini(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace mwss::harness
