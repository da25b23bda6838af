#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mwss/corpus.hpp"
#include "mwss/weak_labels.hpp"

namespace mwss::data {

/// Synthetic corpus with planted social signals.
///
/// News text mixes tokens from a class pool, a topic pool and filler. Each
/// news item gets engagements whose statistics make every labeling function
/// reproduce a planted vote: the true label, flipped for exactly
/// round(rho_k * pool) items of the clean pool and of the unlabeled pool.
struct SynthConfig {
  std::size_t n_clean = 200;
  std::size_t n_unlabeled = 3000;
  double fake_share = 0.5;
  std::array<double, 3> rho{0.1, 0.25, 0.45};  // sentiment, bias, credibility
  double noise_focus = 0.0;       // share of each source's flips drawn from the blind topics
  double real_flip_share = 0.5;   // share of flips taken from truly real items
  std::size_t blind_topics = 3;   // topics 0..blind_topics-1, shared by all sources
  std::uint64_t seed = 0;

  // text
  std::size_t class_vocab = 300;
  std::size_t topics = 8;
  std::size_t topic_vocab = 40;
  std::size_t filler_vocab = 1500;
  std::size_t min_length = 40;
  std::size_t max_length = 80;
  double signal_share = 0.15;        // tokens from the own class pool
  double topic_class_share = 0.0;    // of those, the share drawn from the class pool of the news topic
  double topic_share = 0.3;

  // social
  std::size_t min_engagements = 3;
  std::size_t max_engagements = 6;
  std::size_t humans_per_group = 400;  // groups: left, right, neutral
  std::size_t bot_clusters_per_group = 10;
  std::size_t bot_cluster_size = 20;
  std::size_t seed_users_per_side = 10;
  std::size_t history_texts = 5;
  std::size_t political_vocab = 30;

  void validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<LabeledId> truth;  // every news item, sorted by id
  weak::Lexicon lexicon;
  std::vector<std::string> left_seeds;
  std::vector<std::string> right_seeds;
  std::array<std::vector<int>, 3> planted;  // per source, the vote planted for corpus.news[i]
};

SynthCorpus synth_generate(const SynthConfig& config);

}  // namespace mwss::data
