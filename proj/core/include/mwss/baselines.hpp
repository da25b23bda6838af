#pragma once

#include <span>
#include <string_view>

#include "mwss/model.hpp"
#include "mwss/trainer.hpp"

namespace mwss::baselines {

enum class BaselineMode { clean_only, weak_only, clean_plus_weak, majority_vote_merge };

BaselineMode parse_mode(std::string_view name);
std::string_view to_string(BaselineMode m);

/// Strict majority wins; ties go to `tie` (0, real, by default).
int majority_vote(std::span<const int> votes, int tie = 0);

/// One weak set holding, for every news id labeled by any source, the majority of its votes.
/// Sorted by id.
std::vector<model::Example> majority_merge(const std::vector<std::vector<model::Example>>& weak, int tie = 0);

/// Spec, config and data actually trained for a mode.
struct BaselineRun {
  model::ModelSpec spec;
  meta::TrainConfig config;
  meta::Datasets data;
};

/// Adapts an MWSS setup to a baseline. Every mode keeps the MWSS step budget
/// and seed; weak instances get unit weight and the LWN is not trained.
///   clean_only: weak sets emptied.
///   weak_only: clean training set emptied, prediction by the mean of the weak heads.
///   clean_plus_weak: all sources as given.
///   majority_vote_merge: the sources collapsed into one set by majority vote.
BaselineRun prepare(BaselineMode mode, const model::ModelSpec& spec, const meta::TrainConfig& config,
                    const meta::Datasets& data, int majority_tie = 0);

meta::TrainResult train_baseline(BaselineMode mode, const model::ModelSpec& spec, const meta::TrainConfig& config,
                                 const meta::Datasets& data, int majority_tie = 0);

}  // namespace mwss::baselines
