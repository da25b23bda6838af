#include "mwss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwss/errors.hpp"

namespace mwss::meta {
namespace {

constexpr std::uint64_t kStreamClean = 1;
constexpr std::uint64_t kStreamVal = 2;
constexpr std::uint64_t kStreamWeak = 100;
constexpr std::uint64_t kStreamTheta = 1000;
constexpr std::uint64_t kStreamAlpha = 1001;

model::Batch all_of(const std::vector<model::Example>& v) {
  model::Batch b;
  b.reserve(v.size());
  for (const auto& e : v) b.push_back(&e);
  return b;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr_theta > 0.0) || lr_alpha < 0.0) throw ValidationError("learning rates must be positive (lr_alpha may be 0)");
  if (batch_clean == 0 || batch_weak == 0 || batch_val == 0) throw ValidationError("batch sizes must be positive");
  if (!(fd_scale > 0.0)) throw ValidationError("fd_scale must be positive");
  if (eval_every == 0) throw ValidationError("eval_every must be positive");
  if (pinned_weight && (*pinned_weight < 0.0 || !std::isfinite(*pinned_weight))) {
    throw ValidationError("pinned weight must be a finite non-negative number");
  }
}

model::Batch BatchSampler::Stream::next() {
  model::Batch b;
  if (data == nullptr || data->empty()) return b;
  if (pos >= order.size()) {
    order.resize(data->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    pos = 0;
  }
  const std::size_t end = std::min(pos + batch, order.size());
  for (; pos < end; ++pos) b.push_back(&(*data)[order[pos]]);
  return b;
}

BatchSampler::BatchSampler(const Datasets& data, const TrainConfig& config) {
  Rng root(config.seed);
  clean_ = Stream{&data.clean_train, config.batch_clean, {}, 0, root.fork(kStreamClean)};
  val_ = Stream{&data.clean_val, config.batch_val, {}, 0, root.fork(kStreamVal)};
  for (std::size_t k = 0; k < data.weak.size(); ++k) {
    weak_.push_back(Stream{&data.weak[k], config.batch_weak, {}, 0, root.fork(kStreamWeak + k)});
  }
}

model::Batches BatchSampler::next_train() {
  model::Batches b;
  b.clean = clean_.next();
  for (auto& s : weak_) b.weak.push_back(s.next());
  return b;
}

model::Batch BatchSampler::next_val() { return val_.next(); }

HypergradResult hypergradient(const model::ModelSpec& spec, const nn::ParamVector& theta,
                              const nn::ParamVector& alpha, const model::Batches& batches,
                              const model::Batch& val_batch, double eta, double fd_scale,
                              const model::WeightPolicy& policy) {
  if (val_batch.empty()) throw ValidationError("hypergradient: empty validation batch");
  HypergradResult out;
  out.grad_alpha = alpha.zeros_like();
  const bool any_weak = std::any_of(batches.weak.begin(), batches.weak.end(), [](const auto& b) { return !b.empty(); });
  if (!any_weak || policy.pinned) return out;

  const auto g = model::train_loss(spec, theta, alpha, batches, policy, {.theta = true, .alpha = false}).grad_theta;
  const auto lookahead = nn::sgd_lookahead(theta, g, eta);
  const auto val_grad = model::val_loss(spec, lookahead, val_batch, true).grad;
  out.val_grad_norm = nn::norm2(val_grad);
  if (out.val_grad_norm == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.epsilon = fd_scale / std::max(out.val_grad_norm, 1e-12);
  const auto plus = nn::perturb(theta, val_grad, out.epsilon, nn::Sign::plus);
  const auto minus = nn::perturb(theta, val_grad, out.epsilon, nn::Sign::minus);
  const model::GradRequest alpha_only{.theta = false, .alpha = true};
  const auto ga_plus = model::train_loss(spec, plus, alpha, batches, policy, alpha_only, &theta).grad_alpha;
  const auto ga_minus = model::train_loss(spec, minus, alpha, batches, policy, alpha_only, &theta).grad_alpha;
  const double scale = -eta / (2.0 * out.epsilon);
  auto r = out.grad_alpha.values();
  const auto p = ga_plus.values();
  const auto m = ga_minus.values();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = scale * (p[i] - m[i]);
  return out;
}

TrainState TrainState::init(const model::ModelSpec& spec, const TrainConfig& config) {
  TrainState s;
  Rng root(config.seed);
  Rng theta_rng = root.fork(kStreamTheta);
  Rng alpha_rng = root.fork(kStreamAlpha);
  s.theta = model::init_classifier(spec, theta_rng);
  s.alpha = model::init_lwn(spec, alpha_rng);
  s.theta_opt = nn::AdamState::init(s.theta, config.adam);
  s.alpha_opt = nn::AdamState::init(s.alpha, config.adam);
  s.best_theta = s.theta;
  return s;
}

StepReport meta_step(const model::ModelSpec& spec, TrainState& state, const TrainConfig& config,
                     BatchSampler& sampler) {
  const auto policy = config.weight_policy();
  const auto batches = sampler.next_train();
  StepReport report;
  try {
    if (config.meta_update) {
      const auto val = sampler.next_val();
      auto hg = hypergradient(spec, state.theta, state.alpha, batches, val, config.lr_theta, config.fd_scale, policy);
      report.degenerate_hypergradient = hg.degenerate;
      auto upd = nn::adam_step(std::move(state.alpha_opt), std::move(state.alpha), hg.grad_alpha, config.lr_alpha);
      state.alpha = std::move(upd.params);
      state.alpha_opt = std::move(upd.state);
    }
    auto loss = model::train_loss(spec, state.theta, state.alpha, batches, policy, {.theta = true, .alpha = false});
    auto upd = nn::adam_step(std::move(state.theta_opt), std::move(state.theta), loss.grad_theta, config.lr_theta);
    state.theta = std::move(upd.params);
    state.theta_opt = std::move(upd.state);
    report.train_loss = loss.total;
    report.mean_weight = std::move(loss.mean_weight);
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(state.step + 1) + ": " + e.what());
  }
  state.step += 1;
  return report;
}

MetricsReport metrics_from_predictions(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) throw ValidationError("metrics: predictions and labels differ in length");
  if (probabilities.empty()) throw ValidationError("metrics: empty evaluation set");
  MetricsReport m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool fake = probabilities[i] > 0.5;
    if (labels[i] == 1) {
      fake ? ++m.tp : ++m.fn;
    } else {
      fake ? ++m.fp : ++m.tn;
    }
  }
  const auto d = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  m.accuracy = d(m.tp + m.tn, m.total());
  m.precision = d(m.tp, m.tp + m.fp);
  m.recall = d(m.tp, m.tp + m.fn);
  m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

MetricsReport evaluate(const model::ModelSpec& spec, const nn::ParamVector& theta,
                       std::span<const model::Example> examples, model::InferenceHead head) {
  if (examples.empty()) throw ValidationError("evaluate: empty labeled set");
  std::vector<double> probs;
  std::vector<int> labels;
  probs.reserve(examples.size());
  labels.reserve(examples.size());
  for (const auto& ex : examples) {
    probs.push_back(model::predict(spec, theta, ex.tokens, head));
    labels.push_back(ex.label);
  }
  return metrics_from_predictions(probs, labels);
}

std::size_t step_budget(const Datasets& data, const TrainConfig& config) {
  std::size_t per_epoch = 0;
  for (const auto& w : data.weak) per_epoch = std::max(per_epoch, (w.size() + config.batch_weak - 1) / config.batch_weak);
  if (per_epoch == 0) per_epoch = (data.clean_train.size() + config.batch_clean - 1) / config.batch_clean;
  return std::min(config.max_steps, config.epochs * per_epoch);
}

TrainResult train(const model::ModelSpec& spec, const TrainConfig& config, const Datasets& data) {
  config.validate();
  if (data.clean_val.empty()) throw ValidationError("train: clean validation set is empty");
  if (data.weak.size() != spec.num_sources) {
    throw ValidationError("train: " + std::to_string(data.weak.size()) + " weak sets for K=" +
                          std::to_string(spec.num_sources));
  }
  auto state = TrainState::init(spec, config);
  BatchSampler sampler(data, config);
  const auto full_val = all_of(data.clean_val);
  const std::size_t budget = step_budget(data, config);

  auto record = [&](std::optional<double> train_loss, std::vector<double> mean_weight) {
    const auto v = model::val_loss(spec, state.theta, full_val, false, config.inference);
    HistoryRow row{state.step, train_loss, v.loss,
                   static_cast<double>(v.correct) / static_cast<double>(full_val.size()), std::move(mean_weight)};
    if (row.val_accuracy > state.best_val_accuracy) {
      state.best_val_accuracy = row.val_accuracy;
      state.best_theta = state.theta;
      state.best_step = state.step;
    }
    state.history.push_back(std::move(row));
  };

  record(std::nullopt, std::vector<double>(spec.num_sources, 0.0));
  while (state.step < budget) {
    auto rep = meta_step(spec, state, config, sampler);
    if (state.step % config.eval_every == 0 || state.step == budget) record(rep.train_loss, std::move(rep.mean_weight));
  }
  return {std::move(state.best_theta), std::move(state.alpha), std::move(state.history), state.best_step,
          state.best_val_accuracy, state.step};
}

}  // namespace mwss::meta
