#include "mwss/baselines.hpp"

#include <algorithm>
#include <map>

#include "mwss/errors.hpp"

namespace mwss::baselines {

BaselineMode parse_mode(std::string_view name) {
  for (auto m : {BaselineMode::clean_only, BaselineMode::weak_only, BaselineMode::clean_plus_weak,
                 BaselineMode::majority_vote_merge}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown baseline mode '" + std::string(name) + "'");
}

std::string_view to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::clean_only: return "clean_only";
    case BaselineMode::weak_only: return "weak_only";
    case BaselineMode::clean_plus_weak: return "clean_plus_weak";
    case BaselineMode::majority_vote_merge: return "majority_vote_merge";
  }
  return "?";
}

int majority_vote(std::span<const int> votes, int tie) {
  if (votes.empty()) throw ValidationError("majority_vote needs at least one vote");
  std::size_t fake = 0;
  for (int v : votes) {
    if (v != 0 && v != 1) throw ValidationError("majority_vote: votes must be 0 or 1");
    fake += static_cast<std::size_t>(v);
  }
  const std::size_t real = votes.size() - fake;
  if (fake == real) return tie;
  return fake > real ? 1 : 0;
}

std::vector<model::Example> majority_merge(const std::vector<std::vector<model::Example>>& weak, int tie) {
  std::map<std::string, std::pair<const model::Example*, std::vector<int>>> by_id;
  for (const auto& set : weak) {
    for (const auto& ex : set) {
      auto& slot = by_id[ex.id];
      if (!slot.first) slot.first = &ex;
      slot.second.push_back(ex.label);
    }
  }
  std::vector<model::Example> out;
  out.reserve(by_id.size());
  for (const auto& [id, slot] : by_id) {
    model::Example ex = *slot.first;
    ex.label = majority_vote(slot.second, tie);
    out.push_back(std::move(ex));
  }
  return out;
}

BaselineRun prepare(BaselineMode mode, const model::ModelSpec& spec, const meta::TrainConfig& config,
                    const meta::Datasets& data, int majority_tie) {
  const bool has_weak = std::any_of(data.weak.begin(), data.weak.end(), [](const auto& w) { return !w.empty(); });
  if (mode != BaselineMode::weak_only && data.clean_train.empty()) {
    throw ValidationError(std::string(to_string(mode)) + " needs clean training data");
  }
  if (mode != BaselineMode::clean_only && !has_weak) {
    throw ValidationError(std::string(to_string(mode)) + " needs weak data");
  }

  BaselineRun run{spec, config, data};
  const std::size_t budget = meta::step_budget(data, config);
  run.config.max_steps = budget;
  run.config.epochs = std::max<std::size_t>(budget, 1);
  run.config.meta_update = false;
  run.config.pinned_weight = 1.0;
  run.config.inference = model::InferenceHead::clean;

  switch (mode) {
    case BaselineMode::clean_only:
      for (auto& w : run.data.weak) w.clear();
      break;
    case BaselineMode::weak_only:
      run.data.clean_train.clear();
      run.config.inference = model::InferenceHead::weak_mean;
      break;
    case BaselineMode::clean_plus_weak:
      break;
    case BaselineMode::majority_vote_merge:
      run.data.weak = {majority_merge(data.weak, majority_tie)};
      run.spec.num_sources = 1;
      break;
  }
  return run;
}

meta::TrainResult train_baseline(BaselineMode mode, const model::ModelSpec& spec, const meta::TrainConfig& config,
                                 const meta::Datasets& data, int majority_tie) {
  const auto run = prepare(mode, spec, config, data, majority_tie);
  return meta::train(run.spec, run.config, run.data);
}

}  // namespace mwss::baselines
