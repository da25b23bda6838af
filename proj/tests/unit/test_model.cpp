#include <gtest/gtest.h>

#include <cmath>

#include "mwss/errors.hpp"
#include "mwss/model.hpp"
#include "test_util.hpp"

using namespace mwss;
using namespace mwss::model;

namespace {

ModelSpec toy(std::size_t sources = 2) {
  ModelSpec s;
  s.encoder.variant = text::EncoderVariant::meanpool;
  s.encoder.vocab_size = 20;
  s.encoder.embed_dim = 2;
  s.head_hidden = 3;
  s.num_sources = sources;
  s.label_embed_dim = 2;
  s.lwn_hidden = {3};
  return s;
}

std::vector<Example> examples(std::size_t n, std::uint64_t seed, const std::string& tag) {
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.id = tag + std::to_string(i);
    e.tokens.assign(6, 0);
    const std::size_t len = 1 + rng.index(5);
    for (std::size_t t = 0; t < len; ++t) e.tokens[t] = 1 + static_cast<std::uint32_t>(rng.index(19));
    e.label = static_cast<int>(rng.index(2));
    out.push_back(std::move(e));
  }
  return out;
}

Batch view(const std::vector<Example>& v) {
  Batch b;
  for (const auto& e : v) b.push_back(&e);
  return b;
}

double ref_bce(double p, int y) { return -(y == 1 ? std::log(p) : std::log(1.0 - p)); }

// Random values everywhere, biases included, so no ReLU sits exactly on its kink.
void randomize(nn::ParamVector& p, std::uint64_t seed, double scale = 0.8) {
  Rng rng(seed);
  for (auto& v : p.values()) v = rng.uniform(-scale, scale);
  if (p.layout().contains(text::kEmbedSegment)) {
    auto e = p.segment(text::kEmbedSegment);
    std::fill(e.begin(), e.begin() + 2, 0.0);
  }
}

struct Fixture {
  ModelSpec spec = toy();
  std::vector<Example> clean = examples(4, 1, "c");
  std::vector<Example> w0 = examples(3, 2, "a");
  std::vector<Example> w1 = examples(5, 3, "b");
  Batches batches() const { return {view(clean), {view(w0), view(w1)}}; }
};

}  // namespace

TEST(Model, ZeroParametersPredictHalf) {
  const auto spec = toy();
  nn::ParamVector theta(classifier_layout(spec));
  const auto ex = examples(5, 0, "x");
  for (const auto& e : ex) {
    EXPECT_EQ(predict_clean(spec, theta, e.tokens), 0.5);
    EXPECT_EQ(predict_weak(spec, theta, 1, e.tokens), 0.5);
  }
}

TEST(Model, PredictComposesEncoderAndHead) {
  const auto spec = toy();
  Rng rng(4);
  const auto theta = init_classifier(spec, rng);
  for (const auto& e : examples(6, 5, "x")) {
    const auto h = text::encode(spec.encoder, theta, e.tokens).h;
    const double logit_path = nn::mlp_eval(spec.head_spec(), theta, std::string(kCleanHead), h)[0];
    EXPECT_EQ(predict_clean(spec, theta, e.tokens), logit_path);
    const double weak = nn::mlp_eval(spec.head_spec(), theta, spec.weak_head_prefix(1), h)[0];
    EXPECT_EQ(predict_weak(spec, theta, 1, e.tokens), weak);
    EXPECT_EQ(predict_clean(spec, theta, e.tokens), predict_clean(spec, theta, e.tokens));
  }
}

TEST(Model, IdenticalHeadsAgreeAndIndexIsChecked) {
  const auto spec = toy();
  Rng rng(6);
  auto theta = init_classifier(spec, rng);
  for (const auto& seg : theta.layout().segments()) {
    const std::string p0 = spec.weak_head_prefix(0);
    if (seg.name.rfind(p0, 0) == 0) {
      const auto src = theta.segment(seg.name);
      auto dst = theta.segment(spec.weak_head_prefix(1) + seg.name.substr(p0.size()));
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  const auto e = examples(1, 7, "x")[0];
  EXPECT_EQ(predict_weak(spec, theta, 0, e.tokens), predict_weak(spec, theta, 1, e.tokens));
  EXPECT_THROW(predict_weak(spec, theta, 2, e.tokens), ValidationError);
}

TEST(Model, SharedEncoderProperty) {
  const auto spec = toy();
  nn::ParamVector theta(classifier_layout(spec));
  randomize(theta, 8);
  const auto ex = examples(4, 9, "x");
  auto head_moved = theta;
  for (auto& v : head_moved.segment(std::string(kCleanHead) + ".l0.w")) v += 0.3;
  auto weak_moved = theta;
  for (auto& v : weak_moved.segment(spec.weak_head_prefix(1) + ".l0.w")) v += 0.3;
  auto enc_moved = theta;
  for (auto& v : enc_moved.segment(text::kEmbedSegment).subspan(2)) v += 0.3;
  for (const auto& e : ex) {
    EXPECT_EQ(predict_weak(spec, head_moved, 0, e.tokens), predict_weak(spec, theta, 0, e.tokens));
    EXPECT_EQ(predict_weak(spec, head_moved, 1, e.tokens), predict_weak(spec, theta, 1, e.tokens));
    EXPECT_EQ(predict_weak(spec, weak_moved, 0, e.tokens), predict_weak(spec, theta, 0, e.tokens));
    EXPECT_NE(predict_clean(spec, enc_moved, e.tokens), predict_clean(spec, theta, e.tokens));
    EXPECT_NE(predict_weak(spec, enc_moved, 0, e.tokens), predict_weak(spec, theta, 0, e.tokens));
  }
}

TEST(Lwn, ZeroAlphaGivesHalf) {
  const auto spec = toy();
  nn::ParamVector alpha(lwn_layout(spec));
  const std::vector<double> h{0.3, -1.2};
  EXPECT_EQ(lwn_weight(spec, alpha, h, 0), 0.5);
  EXPECT_EQ(lwn_weight(spec, alpha, h, 1), 0.5);
  EXPECT_THROW(lwn_weight(spec, alpha, h, 2), ValidationError);
  EXPECT_THROW(lwn_weight(spec, alpha, std::vector<double>{1.0}, 0), ValidationError);
}

TEST(Lwn, LabelChangesWeight) {
  const auto spec = toy();
  Rng rng(10);
  const auto alpha = init_lwn(spec, rng);
  const auto emb = alpha.segment(kLabelEmbed);
  ASSERT_NE(emb[0], emb[spec.label_embed_dim]);
  const std::vector<double> h{0.5, 0.25};
  EXPECT_NE(lwn_weight(spec, alpha, h, 0), lwn_weight(spec, alpha, h, 1));
}

TEST(Lwn, OutputStrictlyInsideUnitInterval) {
  const auto spec = toy();
  Rng rng(11);
  auto alpha = init_lwn(spec, rng);
  for (int i = 0; i < 10000; ++i) {
    for (auto& v : alpha.values()) v = rng.uniform(-3, 3);
    const std::vector<double> h{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double w = lwn_weight(spec, alpha, h, static_cast<int>(rng.index(2)));
    ASSERT_GT(w, 0.0);
    ASSERT_LT(w, 1.0);
  }
}

TEST(TrainLoss, WeightOneIsUnweightedSum) {
  Fixture f;
  Rng rng(12);
  const auto theta = init_classifier(f.spec, rng);
  const auto alpha = init_lwn(f.spec, rng);
  const auto r = train_loss(f.spec, theta, alpha, f.batches(), WeightPolicy::constant(1.0));
  double expect = 0;
  for (const auto& e : f.clean) expect += ref_bce(predict_clean(f.spec, theta, e.tokens), e.label) / 4.0;
  for (const auto& e : f.w0) expect += ref_bce(predict_weak(f.spec, theta, 0, e.tokens), e.label) / 3.0;
  for (const auto& e : f.w1) expect += ref_bce(predict_weak(f.spec, theta, 1, e.tokens), e.label) / 5.0;
  EXPECT_NEAR(r.total, expect, 1e-9);
  EXPECT_EQ(r.mean_weight, (std::vector<double>{1.0, 1.0}));
}

TEST(TrainLoss, WeightZeroAnnihilatesWeakTerms) {
  Fixture f;
  Rng rng(13);
  const auto theta = init_classifier(f.spec, rng);
  const auto alpha = init_lwn(f.spec, rng);
  const auto r = train_loss(f.spec, theta, alpha, f.batches(), WeightPolicy::constant(0.0));
  EXPECT_NEAR(r.total, r.clean, 1e-15);
  for (std::size_t k = 0; k < 2; ++k) {
    for (const auto& seg : r.grad_theta.layout().segments()) {
      if (seg.name.rfind(f.spec.weak_head_prefix(k), 0) != 0) continue;
      for (double v : r.grad_theta.segment(seg.name)) EXPECT_EQ(v, 0.0) << seg.name;
    }
  }
}

TEST(TrainLoss, AlphaGradZeroWithoutWeakData) {
  Fixture f;
  Rng rng(14);
  const auto theta = init_classifier(f.spec, rng);
  const auto alpha = init_lwn(f.spec, rng);
  const Batches only_clean{view(f.clean), {{}, {}}};
  const auto r = train_loss(f.spec, theta, alpha, only_clean, WeightPolicy::learned());
  for (double v : r.grad_alpha.values()) EXPECT_EQ(v, 0.0);
  const Batches none{{}, {{}, {}}};
  EXPECT_THROW(train_loss(f.spec, theta, alpha, none, WeightPolicy::learned()), ValidationError);
}

TEST(TrainLoss, BatchMeanOfSingletons) {
  Fixture f;
  Rng rng(15);
  const auto theta = init_classifier(f.spec, rng);
  const auto alpha = init_lwn(f.spec, rng);
  const auto full = train_loss(f.spec, theta, alpha, f.batches(), WeightPolicy::learned(), {false, false});
  double clean = 0, w0 = 0;
  for (const auto& e : f.clean) {
    clean += train_loss(f.spec, theta, alpha, {{&e}, {{}, {}}}, WeightPolicy::learned(), {false, false}).clean;
  }
  for (const auto& e : f.w0) {
    w0 += train_loss(f.spec, theta, alpha, {{}, {{&e}, {}}}, WeightPolicy::learned(), {false, false}).weak[0];
  }
  EXPECT_NEAR(full.clean, clean / 4.0, 1e-9);
  EXPECT_NEAR(full.weak[0], w0 / 3.0, 1e-9);
}

class TrainLossGradient : public ::testing::TestWithParam<int> {};

TEST_P(TrainLossGradient, MatchesCentralDifferences) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  ModelSpec spec = toy(1);
  const auto clean = examples(3, 100 + seed, "c");
  const auto weak = examples(4, 200 + seed, "w");
  const Batches b{view(clean), {view(weak)}};
  nn::ParamVector theta(classifier_layout(spec));
  nn::ParamVector alpha(lwn_layout(spec));
  randomize(theta, 300 + seed);
  randomize(alpha, 400 + seed);
  const auto r = train_loss(spec, theta, alpha, b, WeightPolicy::learned());
  auto by_theta = [&](const nn::ParamVector& q) {
    return train_loss(spec, q, alpha, b, WeightPolicy::learned(), {false, false}, &theta).total;
  };
  auto by_alpha = [&](const nn::ParamVector& a) {
    return train_loss(spec, theta, a, b, WeightPolicy::learned(), {false, false}).total;
  };
  EXPECT_LT(check::max_grad_error(by_theta, theta, r.grad_theta), 1e-4);
  EXPECT_LT(check::max_grad_error(by_alpha, alpha, r.grad_alpha), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, TrainLossGradient, ::testing::Range(0, 20));

TEST(ModelSpec, ValidatesShape) {
  auto s = toy();
  s.num_sources = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = toy();
  s.sharing = HeadSharing::shared;
  EXPECT_EQ(s.num_weak_heads(), 1u);
  EXPECT_EQ(s.weak_head_prefix(0), s.weak_head_prefix(1));
  EXPECT_EQ(parse_head_sharing("multi"), HeadSharing::multi);
}
