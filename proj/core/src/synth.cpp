#include "mwss/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mwss/errors.hpp"
#include "mwss/rng.hpp"

namespace mwss::data {
namespace {

enum Group { kLeft = 0, kRight = 1, kNeutral = 2 };

std::string numbered(const char* prefix, std::size_t i, int width = 5) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

std::string group_token(int group, std::size_t i) {
  static const char* prefix[] = {"lp", "rp", "np"};
  return prefix[group] + std::to_string(i);
}

std::string valence_token(int hundredths) {
  if (hundredths == 0) return "meh";
  return (hundredths > 0 ? "pos" : "neg") + std::to_string(std::abs(hundredths));
}

struct UserPools {
  // [group][bot?] -> user indices
  std::array<std::array<std::vector<std::size_t>, 2>, 3> members;
};

// Points in [0, 1000]^4 at least `gap` apart.
std::vector<std::array<double, 4>> spread_points(std::size_t n, double gap, Rng& rng) {
  std::vector<std::array<double, 4>> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    std::array<double, 4> p{};
    for (auto& x : p) x = rng.uniform(0.0, 1000.0);
    bool ok = true;
    for (const auto& q : pts) {
      double d = 0.0;
      for (int c = 0; c < 4; ++c) d += (p[c] - q[c]) * (p[c] - q[c]);
      if (d < gap * gap) {
        ok = false;
        break;
      }
    }
    if (ok) pts.push_back(p);
  }
  return pts;
}

std::vector<std::size_t> pick_distinct(const std::vector<std::size_t>& pool, std::size_t m, Rng& rng) {
  std::vector<std::size_t> out;
  while (out.size() < m) {
    const auto u = pool[rng.index(pool.size())];
    if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
  }
  return out;
}

// n items of one class, `focus` of them from the blind topics where possible.
void take(const std::vector<std::size_t>& cand, const std::vector<std::size_t>& topic, std::size_t n, double focus,
          std::size_t blind_topics, Rng& rng, std::vector<std::size_t>& out) {
  std::vector<std::size_t> blind, rest;
  for (auto i : cand) (topic[i] < blind_topics ? blind : rest).push_back(i);
  rng.shuffle(std::span(blind));
  rng.shuffle(std::span(rest));
  std::size_t nb = std::min(blind.size(), static_cast<std::size_t>(std::llround(focus * static_cast<double>(n))));
  const std::size_t nr = std::min(rest.size(), n - nb);
  nb = std::min(blind.size(), n - nr);
  out.insert(out.end(), blind.begin(), blind.begin() + static_cast<std::ptrdiff_t>(nb));
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(nr));
}

// Indices of the items whose planted vote is flipped: the flip direction is
// honoured first, the topic focus second.
std::vector<std::size_t> choose_flips(const std::vector<std::size_t>& pool, const std::vector<std::size_t>& topic,
                                      const std::vector<int>& label, double rho, const SynthConfig& cfg, Rng& rng) {
  const auto count = static_cast<std::size_t>(std::llround(rho * static_cast<double>(pool.size())));
  std::vector<std::size_t> real, fake;
  for (auto i : pool) (label[i] == 0 ? real : fake).push_back(i);
  std::size_t n_real = std::min(real.size(), static_cast<std::size_t>(std::llround(cfg.real_flip_share * static_cast<double>(count))));
  const std::size_t n_fake = std::min(fake.size(), count - n_real);
  n_real = std::min(real.size(), count - n_fake);
  std::vector<std::size_t> out;
  take(real, topic, n_real, cfg.noise_focus, cfg.blind_topics, rng, out);
  take(fake, topic, n_fake, cfg.noise_focus, cfg.blind_topics, rng, out);
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("synth." + field + " " + why);
  };
  static const char* source_names[] = {"sentiment", "bias", "credibility"};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(rho[k] >= 0.0 && rho[k] < 0.5)) fail(std::string("rho_") + source_names[k], "must lie in [0, 0.5)");
  }
  if (n_clean + n_unlabeled == 0) fail("n_clean", "and n_unlabeled cannot both be 0");
  if (!(fake_share > 0.0 && fake_share < 1.0)) fail("fake_share", "must lie in (0, 1)");
  if (!(noise_focus >= 0.0 && noise_focus <= 1.0)) fail("noise_focus", "must lie in [0, 1]");
  if (!(real_flip_share >= 0.0 && real_flip_share <= 1.0)) fail("real_flip_share", "must lie in [0, 1]");
  if (!(topic_class_share >= 0.0 && topic_class_share <= 1.0)) fail("topic_class_share", "must lie in [0, 1]");
  if (class_vocab == 0 || topics == 0 || topic_vocab == 0 || filler_vocab == 0) fail("vocabulary sizes", "must be positive");
  if (min_length == 0 || min_length > max_length) fail("min_length", "must be in [1, max_length]");
  if (!(signal_share >= 0.0 && topic_share >= 0.0 && signal_share + topic_share <= 1.0)) {
    fail("signal_share", "and topic_share must be non-negative with sum <= 1");
  }
  if (min_engagements < 2 || min_engagements > max_engagements) fail("min_engagements", "must be in [2, max_engagements]");
  if (humans_per_group < max_engagements) fail("humans_per_group", "must be at least max_engagements");
  if (bot_clusters_per_group * bot_cluster_size < max_engagements) {
    fail("bot_clusters_per_group", "times bot_cluster_size must be at least max_engagements");
  }
  if (bot_cluster_size < 9) fail("bot_cluster_size", "must be at least 9 so bots score below the default credibility threshold");
  if (seed_users_per_side == 0 || history_texts == 0 || political_vocab == 0) {
    fail("seed_users_per_side", "history_texts and political_vocab must be positive");
  }
}

SynthCorpus synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  const std::size_t total = cfg.n_clean + cfg.n_unlabeled;

  // Which positions are clean, and the true labels (exact fake counts per pool).
  std::vector<bool> is_clean(total, false);
  std::fill(is_clean.begin(), is_clean.begin() + static_cast<std::ptrdiff_t>(cfg.n_clean), true);
  {
    Rng r = root.fork(1);
    std::vector<char> tmp(is_clean.begin(), is_clean.end());
    r.shuffle(std::span(tmp));
    std::copy(tmp.begin(), tmp.end(), is_clean.begin());
  }
  std::array<std::vector<std::size_t>, 2> pools;  // 0 clean, 1 unlabeled
  for (std::size_t i = 0; i < total; ++i) pools[is_clean[i] ? 0 : 1].push_back(i);
  std::vector<int> label(total, 0);
  {
    Rng r = root.fork(2);
    for (auto& pool : pools) {
      const auto fakes = static_cast<std::size_t>(std::llround(cfg.fake_share * static_cast<double>(pool.size())));
      std::vector<std::size_t> order = pool;
      r.shuffle(std::span(order));
      for (std::size_t j = 0; j < fakes; ++j) label[order[j]] = 1;
    }
  }

  SynthCorpus out;
  auto& corpus = out.corpus;

  // News text.
  std::vector<std::size_t> topic(total);
  {
    Rng r = root.fork(3);
    for (std::size_t i = 0; i < total; ++i) {
      topic[i] = r.index(cfg.topics);
      const std::size_t len = cfg.min_length + r.index(cfg.max_length - cfg.min_length + 1);
      std::vector<std::string> words;
      words.reserve(len);
      for (std::size_t j = 0; j < len; ++j) {
        const double u = r.uniform();
        if (u < cfg.signal_share) {
          std::string w = "c" + std::to_string(label[i]);
          if (r.bernoulli(cfg.topic_class_share)) w += "p" + std::to_string(topic[i]);
          words.push_back(w + "t" + std::to_string(r.index(cfg.class_vocab)));
        } else if (u < cfg.signal_share + cfg.topic_share) {
          words.push_back("tp" + std::to_string(topic[i]) + "x" + std::to_string(r.index(cfg.topic_vocab)));
        } else {
          words.push_back("w" + std::to_string(r.index(cfg.filler_vocab)));
        }
      }
      NewsArticle a{numbered("n", i), join(words), std::nullopt};
      if (is_clean[i]) a.label = label[i];
      corpus.news.push_back(std::move(a));
      out.truth.push_back({corpus.news.back().id, label[i]});
    }
  }

  // Planted votes.
  for (std::size_t k = 0; k < 3; ++k) {
    out.planted[k] = label;
    Rng r = root.fork(10 + k);
    for (const auto& pool : pools) {
      for (auto i : choose_flips(pool, topic, label, cfg.rho[k], cfg, r)) out.planted[k][i] = 1 - label[i];
    }
  }

  // Users: per group, singleton humans and tight bot clusters; then the seed users.
  UserPools pools_by_kind;
  {
    Rng r = root.fork(20);
    const std::size_t bot_groups = 3 * cfg.bot_clusters_per_group;
    const auto centers = spread_points(3 * cfg.humans_per_group + bot_groups + 2 * cfg.seed_users_per_side, 10.0, r);
    std::size_t next_center = 0;
    auto history = [&](int group) {
      std::vector<std::string> texts;
      for (std::size_t t = 0; t < cfg.history_texts; ++t) {
        const std::size_t len = 8 + r.index(8);
        std::vector<std::string> words;
        for (std::size_t j = 0; j < len; ++j) words.push_back(group_token(group, r.index(cfg.political_vocab)));
        texts.push_back(join(words));
      }
      return texts;
    };
    auto add_user = [&](int group, std::vector<double> meta) {
      corpus.users.push_back({numbered("u", corpus.users.size()), history(group), std::move(meta)});
      return corpus.users.size() - 1;
    };
    for (int g = 0; g < 3; ++g) {
      for (std::size_t h = 0; h < cfg.humans_per_group; ++h) {
        const auto& c = centers[next_center++];
        pools_by_kind.members[g][0].push_back(add_user(g, {c.begin(), c.end()}));
      }
      for (std::size_t b = 0; b < cfg.bot_clusters_per_group; ++b) {
        const auto& c = centers[next_center++];
        for (std::size_t m = 0; m < cfg.bot_cluster_size; ++m) {
          std::vector<double> meta(c.begin(), c.end());
          for (auto& x : meta) x += 0.05 * r.normal();
          pools_by_kind.members[g][1].push_back(add_user(g, std::move(meta)));
        }
      }
    }
    for (int side = kLeft; side <= kRight; ++side) {
      for (std::size_t s = 0; s < cfg.seed_users_per_side; ++s) {
        const auto& c = centers[next_center++];
        const auto u = add_user(side, {c.begin(), c.end()});
        (side == kLeft ? out.left_seeds : out.right_seeds).push_back(corpus.users[u].id);
      }
    }
  }

  // Engagements.
  {
    Rng r = root.fork(21);
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t m = cfg.min_engagements + r.index(cfg.max_engagements - cfg.min_engagements + 1);
      const bool bot = out.planted[2][i] == 1;
      std::vector<std::size_t> candidates;
      if (out.planted[1][i] == 1) {
        candidates = pools_by_kind.members[kLeft][bot];
        const auto& right = pools_by_kind.members[kRight][bot];
        candidates.insert(candidates.end(), right.begin(), right.end());
      } else {
        candidates = pools_by_kind.members[kNeutral][bot];
      }
      const auto users = pick_distinct(candidates, m, r);

      // Sentiment in hundredths: alternating signs for a high spread, one repeated score for none.
      // The repeated score is a multiple of 0.25 so the spread comes out exactly zero.
      std::vector<int> scores(m);
      if (out.planted[0][i] == 1) {
        int sign = r.bernoulli(0.5) ? 1 : -1;
        for (auto& s : scores) {
          s = sign * static_cast<int>(40 + r.index(41));
          sign = -sign;
        }
      } else {
        const int centre = 25 * (static_cast<int>(r.index(5)) - 2);
        std::fill(scores.begin(), scores.end(), centre);
      }
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::string> words;
        const std::size_t filler = 3 + r.index(4);
        for (std::size_t f = 0; f < filler; ++f) words.push_back("w" + std::to_string(r.index(cfg.filler_vocab)));
        if (scores[j] != 0 && r.bernoulli(0.3)) {
          words.push_back("not");
          words.push_back(valence_token(-scores[j]));
        } else {
          words.push_back(valence_token(scores[j]));
        }
        corpus.engagements.push_back({corpus.news[i].id, corpus.users[users[j]].id, join(words),
                                      static_cast<std::int64_t>(1'600'000'000 + i * 3600 + j * 60)});
      }
    }
  }

  for (int v = 1; v <= 100; ++v) {
    out.lexicon.set(valence_token(v), v / 100.0);
    out.lexicon.set(valence_token(-v), -v / 100.0);
  }
  out.lexicon.add_negation("not");
  return out;
}

}  // namespace mwss::data
