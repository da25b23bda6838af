#include <benchmark/benchmark.h>

#include "mwss/encoder.hpp"
#include "mwss/model.hpp"
#include "mwss/tokenizer.hpp"
#include "mwss/trainer.hpp"
#include "mwss/weak_labels.hpp"

using namespace mwss;

namespace {

text::TokenIds random_tokens(Rng& rng, std::size_t vocab, std::size_t len, std::size_t max_len) {
  text::TokenIds t(max_len, text::kPadId);
  for (std::size_t i = 0; i < len; ++i) t[i] = 1 + static_cast<std::uint32_t>(rng.index(vocab - 1));
  return t;
}

model::ModelSpec spec_for(text::EncoderVariant v, std::size_t dim) {
  model::ModelSpec s;
  s.encoder.variant = v;
  s.encoder.vocab_size = 4096;
  s.encoder.embed_dim = dim;
  s.encoder.filters_per_width = 32;
  s.head_hidden = 32;
  s.label_embed_dim = 8;
  s.lwn_hidden = {32};
  return s;
}

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
  text::TokenizerConfig c;
  std::string s;
  for (int i = 0; i < 200; ++i) s += "token" + std::to_string(i % 37) + " ";
  for (auto _ : state) benchmark::DoNotOptimize(text::tokenize(s, c));
}
BENCHMARK(BM_Tokenize);

static void BM_Encode(benchmark::State& state) {
  const auto variant = state.range(0) == 0 ? text::EncoderVariant::meanpool : text::EncoderVariant::cnn;
  const auto spec = spec_for(variant, 32);
  Rng rng(1);
  const auto theta = model::init_classifier(spec, rng);
  const auto tokens = random_tokens(rng, spec.encoder.vocab_size, 80, 128);
  for (auto _ : state) benchmark::DoNotOptimize(text::encode(spec.encoder, theta, tokens));
  state.SetLabel(std::string(text::to_string(variant)));
}
BENCHMARK(BM_Encode)->Arg(0)->Arg(1);

static void BM_TrainLoss(benchmark::State& state) {
  const auto spec = spec_for(text::EncoderVariant::meanpool, 32);
  Rng rng(2);
  const auto theta = model::init_classifier(spec, rng);
  const auto alpha = model::init_lwn(spec, rng);
  std::vector<model::Example> pool;
  for (int i = 0; i < 128; ++i) {
    pool.push_back({std::to_string(i), random_tokens(rng, spec.encoder.vocab_size, 60, 128), i % 2});
  }
  model::Batches b;
  for (int i = 0; i < 32; ++i) b.clean.push_back(&pool[static_cast<std::size_t>(i)]);
  for (int k = 0; k < 3; ++k) {
    model::Batch w;
    for (int i = 0; i < 32; ++i) w.push_back(&pool[static_cast<std::size_t>(32 + 32 * k + i)]);
    b.weak.push_back(w);
  }
  for (auto _ : state) benchmark::DoNotOptimize(model::train_loss(spec, theta, alpha, b, model::WeightPolicy::learned()));
}
BENCHMARK(BM_TrainLoss);

static void BM_Hypergradient(benchmark::State& state) {
  const auto spec = spec_for(text::EncoderVariant::meanpool, 32);
  Rng rng(3);
  const auto theta = model::init_classifier(spec, rng);
  const auto alpha = model::init_lwn(spec, rng);
  std::vector<model::Example> pool;
  for (int i = 0; i < 160; ++i) {
    pool.push_back({std::to_string(i), random_tokens(rng, spec.encoder.vocab_size, 60, 128), i % 2});
  }
  model::Batches b;
  model::Batch val;
  for (int i = 0; i < 32; ++i) {
    b.clean.push_back(&pool[static_cast<std::size_t>(i)]);
    val.push_back(&pool[static_cast<std::size_t>(128 + i)]);
  }
  for (int k = 0; k < 3; ++k) {
    model::Batch w;
    for (int i = 0; i < 32; ++i) w.push_back(&pool[static_cast<std::size_t>(32 + 32 * k + i)]);
    b.weak.push_back(w);
  }
  for (auto _ : state) benchmark::DoNotOptimize(meta::hypergradient(spec, theta, alpha, b, val, 1e-3, 0.01));
}
BENCHMARK(BM_Hypergradient);

static void BM_ClusterUsers(benchmark::State& state) {
  Rng rng(4);
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 100)};
  for (auto _ : state) benchmark::DoNotOptimize(weak::cluster_users(pts, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ClusterUsers)->RangeMultiplier(2)->Range(256, 2048)->Complexity(benchmark::oNSquared);

static void BM_SentimentScore(benchmark::State& state) {
  weak::Lexicon lex;
  for (int i = 1; i <= 100; ++i) {
    lex.set("pos" + std::to_string(i), 0.5);
    lex.set("neg" + std::to_string(i), -0.5);
  }
  lex.add_negation("not");
  const std::string text = "this is not pos3 at all but neg7 and pos12 meh meh";
  for (auto _ : state) benchmark::DoNotOptimize(weak::sentiment_score(text, lex));
}
BENCHMARK(BM_SentimentScore);
BENCHMARK_MAIN();
