#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mwss/adam.hpp"
#include "mwss/model.hpp"
#include "mwss/param_vector.hpp"
#include "mwss/rng.hpp"

namespace mwss::meta {

struct TrainConfig {
  double lr_theta = 1e-3;  // η_θ, also the lookahead step inside the hypergradient
  double lr_alpha = 1e-3;  // η_α
  std::size_t batch_clean = 32;
  std::size_t batch_weak = 32;  // per source
  std::size_t batch_val = 32;
  std::size_t epochs = 30;  // over the largest weak source
  std::size_t max_steps = 5000;
  double fd_scale = 0.01;  // ε = fd_scale / max(‖g′‖, 1e-12)
  std::uint64_t seed = 0;
  std::size_t eval_every = 50;
  nn::AdamConfig adam;
  bool meta_update = true;             // false skips the LWN phase altogether
  std::optional<double> pinned_weight;  // ω ≡ constant instead of the LWN
  model::InferenceHead inference = model::InferenceHead::clean;

  void validate() const;
  model::WeightPolicy weight_policy() const {
    return pinned_weight ? model::WeightPolicy::constant(*pinned_weight) : model::WeightPolicy::learned();
  }
};

struct Datasets {
  std::vector<model::Example> clean_train;
  std::vector<model::Example> clean_val;
  std::vector<std::vector<model::Example>> weak;  // one per source
};

/// Epoch-wise shuffled mini-batches, one independent stream per data set.
/// The last partial batch of an epoch is kept.
class BatchSampler {
 public:
  BatchSampler(const Datasets& data, const TrainConfig& config);

  model::Batches next_train();
  model::Batch next_val();

 private:
  struct Stream {
    const std::vector<model::Example>* data = nullptr;
    std::size_t batch = 0;
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    Rng rng{0};

    model::Batch next();
  };

  Stream clean_;
  std::vector<Stream> weak_;
  Stream val_;
};

struct HypergradResult {
  nn::ParamVector grad_alpha;
  double epsilon = 0.0;
  double val_grad_norm = 0.0;
  bool degenerate = false;  // ‖g′‖ = 0, zero returned
};

/// ∇α L_val(θ − η∇θ L_train(α, θ)) by the one-step lookahead and a symmetric
/// finite difference:
///   g = ∇θ L_train(α, θ);  θ′ = θ − η g;  g′ = ∇θ′ L_val(θ′);
///   θ± = θ ± ε g′;  result = −η/(2ε) [∇α L_train(α, θ⁺) − ∇α L_train(α, θ⁻)].
/// The LWN features inside both ∇α terms are taken at θ. Nothing is mutated.
HypergradResult hypergradient(const model::ModelSpec& spec, const nn::ParamVector& theta,
                              const nn::ParamVector& alpha, const model::Batches& batches,
                              const model::Batch& val_batch, double eta, double fd_scale,
                              const model::WeightPolicy& policy = model::WeightPolicy::learned());

struct HistoryRow {
  std::size_t step = 0;
  std::optional<double> train_loss;  // absent for the initial row
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  std::vector<double> mean_weight;  // per source, from the step's weak batches
};

struct TrainState {
  nn::ParamVector theta;
  nn::AdamState theta_opt;
  nn::ParamVector alpha;
  nn::AdamState alpha_opt;
  std::size_t step = 0;
  nn::ParamVector best_theta;
  double best_val_accuracy = -1.0;
  std::size_t best_step = 0;
  std::vector<HistoryRow> history;

  static TrainState init(const model::ModelSpec& spec, const TrainConfig& config);
};

struct StepReport {
  double train_loss = 0.0;
  std::vector<double> mean_weight;
  bool degenerate_hypergradient = false;
};

/// One round of the two-phase update: α first (Adam on the hypergradient),
/// then θ (Adam on ∇θ L_train under the new α).
StepReport meta_step(const model::ModelSpec& spec, TrainState& state, const TrainConfig& config,
                     BatchSampler& sampler);

struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

/// Threshold rule: fake iff p > 0.5. F1 is for the fake class, 0 when precision + recall = 0.
MetricsReport metrics_from_predictions(std::span<const double> probabilities, std::span<const int> labels);

MetricsReport evaluate(const model::ModelSpec& spec, const nn::ParamVector& theta,
                       std::span<const model::Example> examples,
                       model::InferenceHead head = model::InferenceHead::clean);

/// Steps the budget allows: min(max_steps, epochs × batches per epoch of the largest weak source).
std::size_t step_budget(const Datasets& data, const TrainConfig& config);

struct TrainResult {
  nn::ParamVector theta;  // snapshot with the best validation accuracy
  nn::ParamVector alpha;  // final LWN
  std::vector<HistoryRow> history;
  std::size_t best_step = 0;
  double best_val_accuracy = 0.0;
  std::size_t steps = 0;
};

TrainResult train(const model::ModelSpec& spec, const TrainConfig& config, const Datasets& data);

}  // namespace mwss::meta
