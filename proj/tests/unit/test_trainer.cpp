#include <gtest/gtest.h>

#include <algorithm>

#include "mwss/baselines.hpp"
#include "mwss/errors.hpp"
#include "mwss/trainer.hpp"
#include "toy_problem.hpp"

using namespace mwss;
using namespace mwss::meta;
using check::ToyProblem;

namespace {

bool bitwise_equal(const nn::ParamVector& a, const nn::ParamVector& b) {
  return a.size() == b.size() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

Datasets toy_datasets(const ToyProblem& t, std::size_t scale = 1) {
  Datasets d;
  Rng rng(99);
  d.clean_train = ToyProblem::draw(12 * scale, rng, "c", 0.0);
  d.clean_val = ToyProblem::draw(10 * scale, rng, "v", 0.0);
  d.weak = {ToyProblem::draw(30 * scale, rng, "w", 0.3)};
  (void)t;
  return d;
}

TrainConfig toy_config() {
  TrainConfig c;
  c.lr_theta = 0.05;
  c.lr_alpha = 0.01;
  c.batch_clean = 4;
  c.batch_weak = 8;
  c.batch_val = 5;
  c.epochs = 3;
  c.eval_every = 2;
  return c;
}

}  // namespace

TEST(Hypergradient, MatchesNumericOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = ToyProblem::make(seed);
    ASSERT_LE(t.alpha.size(), 10u);
    const auto hg = hypergradient(t.spec, t.theta, t.alpha, t.batches(), t.val_batch(), 1e-2, 0.01);
    const auto oracle = t.numeric_hypergradient(1e-2);
    EXPECT_GE(check::cosine(hg.grad_alpha.values(), oracle), 0.99) << "seed " << seed;
    EXPECT_LE(check::norm_rel_error(hg.grad_alpha.values(), oracle), 0.05) << "seed " << seed;
  }
}

TEST(Hypergradient, ZeroWithoutWeakDataOrStep) {
  const auto t = ToyProblem::make(1);
  const model::Batches no_weak{ToyProblem::view(t.clean), {{}}};
  const auto a = hypergradient(t.spec, t.theta, t.alpha, no_weak, t.val_batch(), 1e-2, 0.01);
  for (double v : a.grad_alpha.values()) EXPECT_EQ(v, 0.0);
  const auto b = hypergradient(t.spec, t.theta, t.alpha, t.batches(), t.val_batch(), 0.0, 0.01);
  for (double v : b.grad_alpha.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(hypergradient(t.spec, t.theta, t.alpha, t.batches(), {}, 1e-2, 0.01), ValidationError);
}

TEST(Hypergradient, MutatesNothing) {
  const auto t = ToyProblem::make(2);
  const auto theta = t.theta;
  const auto alpha = t.alpha;
  (void)hypergradient(t.spec, t.theta, t.alpha, t.batches(), t.val_batch(), 1e-2, 0.01);
  EXPECT_TRUE(bitwise_equal(theta, t.theta));
  EXPECT_TRUE(bitwise_equal(alpha, t.alpha));
}

TEST(Hypergradient, EpsilonScaleIsFirstOrderConsistent) {
  const auto t = ToyProblem::make(3);
  const auto a = hypergradient(t.spec, t.theta, t.alpha, t.batches(), t.val_batch(), 1e-2, 0.01);
  const auto b = hypergradient(t.spec, t.theta, t.alpha, t.batches(), t.val_batch(), 1e-2, 0.02);
  EXPECT_NEAR(b.epsilon, 2.0 * a.epsilon, 1e-15);
  EXPECT_NEAR(a.epsilon * a.val_grad_norm, 0.01, 1e-15);
  EXPECT_LE(check::norm_rel_error(b.grad_alpha.values(), a.grad_alpha.values()), 0.01);
  EXPECT_GE(check::cosine(b.grad_alpha.values(), a.grad_alpha.values()), 0.9999);
}

TEST(MetaStep, AlphaFirstThenThetaUnderNewAlpha) {
  const auto t = ToyProblem::make(4);
  const auto data = toy_datasets(t);
  auto config = toy_config();
  auto state = TrainState::init(t.spec, config);
  const auto before = state;

  // replay the sampler to learn which batches the step sees
  BatchSampler replay(data, config);
  const auto b = replay.next_train();
  const auto v = replay.next_val();
  const auto hg = hypergradient(t.spec, before.theta, before.alpha, b, v, config.lr_theta, config.fd_scale);
  const auto alpha_new = nn::adam_step(before.alpha_opt, before.alpha, hg.grad_alpha, config.lr_alpha).params;
  const auto g = model::train_loss(t.spec, before.theta, alpha_new, b, model::WeightPolicy::learned(), {true, false});
  const auto theta_new = nn::adam_step(before.theta_opt, before.theta, g.grad_theta, config.lr_theta).params;

  BatchSampler sampler(data, config);
  meta_step(t.spec, state, config, sampler);
  EXPECT_EQ(state.step, 1u);
  EXPECT_TRUE(bitwise_equal(state.alpha, alpha_new));
  EXPECT_TRUE(bitwise_equal(state.theta, theta_new));
}

TEST(MetaStep, NoWeakDataFreezesAlpha) {
  const auto t = ToyProblem::make(5);
  auto data = toy_datasets(t);
  data.weak[0].clear();
  auto config = toy_config();
  auto state = TrainState::init(t.spec, config);
  const auto alpha = state.alpha;
  BatchSampler sampler(data, config);
  for (int i = 0; i < 5; ++i) meta_step(t.spec, state, config, sampler);
  EXPECT_TRUE(bitwise_equal(alpha, state.alpha));
}

// Both arms share 20 warm-up steps with η_α = 0 so Adam's moments are not at
// their first-step sign regime; only the compared step differs.
TEST(MetaStep, LwnUpdateLowersValidationLoss) {
  int better = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto t = ToyProblem::make(100 + seed);
    Datasets data;
    data.clean_train = t.clean;
    data.weak = {t.weak};
    data.clean_val = t.val;
    auto config = toy_config();
    config.batch_clean = config.batch_weak = config.batch_val = 64;
    config.seed = seed;
    config.lr_theta = 0.01;
    config.lr_alpha = 0.0;
    auto warm = TrainState::init(t.spec, config);
    warm.theta = t.theta;
    warm.alpha = t.alpha;
    warm.theta_opt = nn::AdamState::init(warm.theta, config.adam);
    warm.alpha_opt = nn::AdamState::init(warm.alpha, config.adam);
    BatchSampler sampler(data, config);
    for (int i = 0; i < 20; ++i) meta_step(t.spec, warm, config, sampler);
    auto run = [&](double lr_alpha) {
      auto c = config;
      c.lr_alpha = lr_alpha;
      auto state = warm;
      auto s = sampler;
      meta_step(t.spec, state, c, s);
      return model::val_loss(t.spec, state.theta, t.val_batch(), false).loss;
    };
    const double a = run(0.05), b = run(0.0);
    if (a < b) ++better;
  }
  EXPECT_GE(better, 8);
}

TEST(Train, DeterministicHistories) {
  const auto t = ToyProblem::make(6);
  const auto data = toy_datasets(t);
  const auto a = train(t.spec, toy_config(), data);
  const auto b = train(t.spec, toy_config(), data);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].step, b.history[i].step);
    EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
    EXPECT_EQ(a.history[i].mean_weight, b.history[i].mean_weight);
  }
  EXPECT_TRUE(bitwise_equal(a.theta, b.theta));
  EXPECT_TRUE(bitwise_equal(a.alpha, b.alpha));
}

TEST(Train, HistoryCadenceAndBestSnapshot) {
  const auto t = ToyProblem::make(7);
  const auto data = toy_datasets(t);
  const auto config = toy_config();
  const auto r = train(t.spec, config, data);
  // 30 weak items / batch 8 → 4 steps per epoch, 3 epochs
  EXPECT_EQ(step_budget(data, config), 12u);
  EXPECT_EQ(r.steps, 12u);
  std::vector<std::size_t> steps;
  double best = -1;
  std::size_t best_step = 0;
  for (const auto& h : r.history) {
    steps.push_back(h.step);
    if (h.val_accuracy > best) {
      best = h.val_accuracy;
      best_step = h.step;
    }
  }
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 2, 4, 6, 8, 10, 12}));
  EXPECT_FALSE(r.history.front().train_loss.has_value());
  EXPECT_EQ(r.best_val_accuracy, best);
  EXPECT_EQ(r.best_step, best_step);
  const auto m = evaluate(t.spec, r.theta, data.clean_val);
  EXPECT_DOUBLE_EQ(m.accuracy, best);
}

TEST(Train, ZeroBudgetReturnsInitialization) {
  const auto t = ToyProblem::make(8);
  const auto data = toy_datasets(t);
  auto config = toy_config();
  config.max_steps = 0;
  const auto r = train(t.spec, config, data);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_TRUE(bitwise_equal(r.theta, TrainState::init(t.spec, config).theta));
}

TEST(Train, RejectsEmptyValidation) {
  const auto t = ToyProblem::make(9);
  auto data = toy_datasets(t);
  data.clean_val.clear();
  EXPECT_THROW(train(t.spec, toy_config(), data), ValidationError);
}

TEST(Train, SeparableCleanOnlyLearns) {
  auto t = ToyProblem::make(10);
  t.spec.head_hidden = 8;
  Rng rng(5);
  Datasets data;
  // fake texts use only tokens 1..6, real only 7..12
  auto separable = [&](std::size_t n, const std::string& tag) {
    auto v = ToyProblem::draw(n, rng, tag, 0.0);
    for (auto& e : v) {
      for (auto& tok : e.tokens) {
        if (tok != 0) tok = static_cast<std::uint32_t>((e.label == 1 ? 1 : 7) + (tok - 1) % 6);
      }
    }
    return v;
  };
  data.clean_train = separable(200, "c");
  data.clean_val = separable(50, "v");
  data.weak = {{}};
  const auto test = separable(200, "t");
  auto config = toy_config();
  config.batch_clean = 32;
  config.epochs = 500;
  config.max_steps = 500;
  config.eval_every = 50;
  const auto r = train(t.spec, config, data);
  EXPECT_LE(r.steps, 500u);
  EXPECT_GT(evaluate(t.spec, r.theta, test).accuracy, 0.95);
}

TEST(Train, PinnedWeightMatchesMergedBaselineBitwise) {
  const auto t = ToyProblem::make(11);
  const auto data = toy_datasets(t);
  auto config = toy_config();
  config.pinned_weight = 1.0;
  config.lr_alpha = 0.0;
  const auto mwss = train(t.spec, config, data);
  const auto merged = baselines::train_baseline(baselines::BaselineMode::clean_plus_weak, t.spec, toy_config(), data);
  EXPECT_TRUE(bitwise_equal(mwss.theta, merged.theta));
  ASSERT_EQ(mwss.history.size(), merged.history.size());
  for (std::size_t i = 0; i < mwss.history.size(); ++i) {
    EXPECT_EQ(mwss.history[i].val_loss, merged.history[i].val_loss);
  }
}

TEST(Metrics, HandExamples) {
  auto m = metrics_from_predictions(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  m = metrics_from_predictions(std::vector<double>{0.9, 0.9}, std::vector<int>{1, 0});
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 0u);
  EXPECT_EQ(m.precision, 0.5);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m.accuracy, 0.5);
  m = metrics_from_predictions(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 0, 0});
  EXPECT_EQ(m.accuracy, 0.75);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_THROW(metrics_from_predictions(std::vector<double>{}, std::vector<int>{}), ValidationError);
}
