#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "mwss/errors.hpp"
#include "mwss/rng.hpp"
#include "mwss/weak_labels.hpp"
#include "test_util.hpp"

using namespace mwss;
using namespace mwss::weak;

namespace {

Lexicon fixture_lexicon() {
  Lexicon l;
  l.set("great", 0.8);
  l.set("wonderful", 0.6);
  l.set("good", 0.8);
  l.set("bad", -0.8);
  l.add_negation("not");
  return l;
}

// Partition as a set of member sets, independent of id numbering.
std::set<std::set<std::size_t>> partition(const std::vector<std::size_t>& ids) {
  std::map<std::size_t, std::set<std::size_t>> g;
  for (std::size_t i = 0; i < ids.size(); ++i) g[ids[i]].insert(i);
  std::set<std::set<std::size_t>> out;
  for (auto& [_, s] : g) out.insert(s);
  return out;
}

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Brute force: recompute every cluster pair's mean pairwise distance each round.
std::set<std::set<std::size_t>> naive_average_linkage(const std::vector<std::vector<double>>& pts, double cut) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < pts.size(); ++i) clusters.push_back({i});
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double s = 0;
        for (auto a : clusters[i]) {
          for (auto b : clusters[j]) s += euclid(pts[a], pts[b]);
        }
        s /= static_cast<double>(clusters[i].size() * clusters[j].size());
        if (s < best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    }
    if (best > cut) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::set<std::set<std::size_t>> out;
  for (auto& c : clusters) out.insert(std::set<std::size_t>(c.begin(), c.end()));
  return out;
}

}  // namespace

TEST(Sentiment, Examples) {
  const auto lex = fixture_lexicon();
  EXPECT_NEAR(sentiment_score("great wonderful", lex), 0.7, 1e-15);
  EXPECT_NEAR(sentiment_score("not great", lex), -0.8, 1e-15);
  EXPECT_EQ(sentiment_score("", lex), 0.0);
  EXPECT_EQ(sentiment_score("nothing matches here", lex), 0.0);
  // the window covers three tokens after the negation
  EXPECT_NEAR(sentiment_score("not a very great", lex), -0.8, 1e-15);
  EXPECT_NEAR(sentiment_score("not a very nice great", lex), 0.8, 1e-15);
  EXPECT_EQ(lex.valence("unknown"), 0.0);
}

TEST(Sentiment, SpreadAndLabel) {
  EXPECT_EQ(sentiment_label(std::vector<double>{0.5, -0.5}), Vote::fake);
  EXPECT_NEAR(*sentiment_spread(std::vector<double>{0.5, -0.5}), 0.5, 1e-15);
  EXPECT_EQ(sentiment_label(std::vector<double>{0.3, 0.3, 0.3}), Vote::real);
  EXPECT_NEAR(*sentiment_spread(std::vector<double>{0.1, 0.2, 0.3}), std::sqrt(0.02 / 3.0), 1e-12);
  EXPECT_EQ(sentiment_label(std::vector<double>{0.1, 0.2, 0.3}), Vote::real);
  EXPECT_EQ(sentiment_label(std::vector<double>{0.9}), Vote::abstain);
  EXPECT_FALSE(sentiment_spread(std::vector<double>{}).has_value());
}

TEST(Sentiment, OrderInvariantAndMeanDoesNotRaiseSpread) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(2 + rng.index(8));
    for (auto& v : s) v = rng.uniform(-1, 1);
    auto shuffled = s;
    rng.shuffle(std::span<double>(shuffled));
    EXPECT_NEAR(*sentiment_spread(s), *sentiment_spread(shuffled), 1e-12);
    double mean = 0;
    for (double v : s) mean += v / static_cast<double>(s.size());
    auto grown = s;
    grown.push_back(mean);
    EXPECT_LE(*sentiment_spread(grown), *sentiment_spread(s) + 1e-15);
  }
}

TEST(Lexicon, FileRoundTrip) {
  const auto dir = check::scratch_dir("lexicon");
  const auto lex = fixture_lexicon();
  lex.save(dir / "lex.tsv", "abc");
  const auto back = Lexicon::load(dir / "lex.tsv");
  EXPECT_EQ(back.size(), lex.size());
  EXPECT_EQ(back.valence("wonderful"), 0.6);
  EXPECT_TRUE(back.is_negation("not"));
  std::ofstream(dir / "bad.tsv") << "great\t1.5\n";
  EXPECT_THROW(Lexicon::load(dir / "bad.tsv"), ValidationError);
}

TEST(Bias, CosineExtremesAndSymmetry) {
  SeedInterestSets seeds;
  seeds.left = {{"lp", 1.0}};
  seeds.right = {{"rp", 1.0}};
  const std::vector<std::string> right_like{"rp rp"}, both{"lp rp"}, empty{};
  EXPECT_NEAR(bias_score(right_like, seeds), 1.0, 1e-15);
  EXPECT_NEAR(bias_score(both, seeds), 0.0, 1e-15);
  EXPECT_EQ(bias_score(empty, seeds), 0.0);
}

TEST(Bias, HandComputedCosineDifference) {
  SeedInterestSets seeds;
  seeds.left = {{"a", 0.5}, {"b", 0.5}};
  seeds.right = {{"b", 0.25}, {"c", 0.75}};
  const std::vector<std::string> history{"a b b c"};
  // profile (0.25, 0.5, 0.25)
  const double p[3] = {0.25, 0.5, 0.25};
  const double l[3] = {0.5, 0.5, 0.0};
  const double r[3] = {0.0, 0.25, 0.75};
  auto cos = [](const double* x, const double* y) {
    double xy = 0, xx = 0, yy = 0;
    for (int i = 0; i < 3; ++i) {
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    return xy / std::sqrt(xx * yy);
  };
  EXPECT_NEAR(bias_score(history, seeds), cos(p, r) - cos(p, l), 1e-9);
}

TEST(Bias, LabelExamples) {
  EXPECT_EQ(bias_label(std::vector<double>{0.9, -0.8}), Vote::fake);
  EXPECT_EQ(bias_label(std::vector<double>{0.0, 0.0}), Vote::real);
  EXPECT_EQ(bias_label(std::vector<double>{0.6, -0.3, 0.2}), Vote::real);
  EXPECT_EQ(bias_label(std::vector<double>{}), Vote::abstain);
}

TEST(Credibility, Examples) {
  EXPECT_EQ(credibility_scores(std::vector<std::vector<double>>{{3.0, 4.0}}, 1.0), std::vector<double>{1.0});
  const std::vector<std::vector<double>> same(4, {1.0, 2.0});
  for (double c : credibility_scores(same, 0.5)) EXPECT_EQ(c, 0.25);
  const std::vector<std::vector<double>> six{{0, 0}, {0.3, 0}, {0, 0.3}, {0.3, 0.3}, {10, 10}, {10.4, 10}};
  const auto cred = credibility_scores(six, 1.0);
  EXPECT_EQ(partition(cluster_users(six, 1.0)), naive_average_linkage(six, 1.0));
  EXPECT_EQ(cred, (std::vector<double>{0.25, 0.25, 0.25, 0.25, 0.5, 0.5}));
  const std::vector<std::vector<double>> ragged{{0, 0}, {1}};
  EXPECT_THROW(cluster_users(ragged, 1.0), ValidationError);
}

TEST(Credibility, MatchesNaiveLinkageOnRandomPoints) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> pts(5 + rng.index(30));
    for (auto& p : pts) {
      // a few blobs so the cut falls between meaningful merges
      const double cx = static_cast<double>(rng.index(4)) * 3.0;
      p = {cx + rng.normal() * 0.6, rng.normal() * 0.6, rng.uniform(0, 1)};
    }
    const double cut = rng.uniform(0.3, 4.0);
    const auto ids = cluster_users(pts, cut);
    EXPECT_EQ(partition(ids), naive_average_linkage(pts, cut)) << "seed " << seed;
    // dense ids in order of first appearance
    std::size_t next = 0;
    for (auto id : ids) {
      EXPECT_LE(id, next);
      if (id == next) ++next;
    }
    const auto cred = credibility_scores(pts, cut);
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ASSERT_GT(cred[i], 0.0);
      ASSERT_LE(cred[i], 1.0);
      total += cred[i];
    }
    EXPECT_NEAR(total, static_cast<double>(next), 1e-9);
  }
}

TEST(Credibility, LabelExamples) {
  EXPECT_EQ(credibility_label(std::vector<double>{1.0, 1.0}), Vote::real);
  EXPECT_EQ(credibility_label(std::vector<double>(16, 1.0 / 16.0)), Vote::fake);
  EXPECT_EQ(credibility_label(std::vector<double>{0.125, 0.125}), Vote::real);
  EXPECT_EQ(credibility_label(std::vector<double>{}), Vote::abstain);
}

TEST(FitThreshold, SeparatedStatistic) {
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    s.push_back(0.1 + 0.029 * i);  // reals up to 0.361
    y.push_back(0);
    s.push_back(0.61 + 0.03 * i);
    y.push_back(1);
  }
  const auto fit = fit_threshold(s, y, FireWhen::above);
  EXPECT_EQ(fit.accuracy, 1.0);
  EXPECT_GE(fit.tau, 0.361);
  EXPECT_LT(fit.tau, 0.61);
  EXPECT_LT(fit.tau - kThresholdGridStep, 0.361);
  EXPECT_FALSE(fit.degenerate);
}

TEST(FitThreshold, MatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> s(10);
    std::vector<int> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.uniform() < s[i] ? 1 : 0;
    }
    for (auto when : {FireWhen::above, FireWhen::below}) {
      int best_hits = -1;
      double best_tau = 0;
      for (int k = 0; k <= 200; ++k) {
        const double tau = k * 0.005;
        int hits = 0;
        for (std::size_t i = 0; i < 10; ++i) {
          const int fires = when == FireWhen::above ? (s[i] > tau) : (s[i] < tau);
          hits += fires == y[i];
        }
        if (hits > best_hits) {
          best_hits = hits;
          best_tau = tau;
        }
      }
      const auto fit = fit_threshold(s, y, when);
      EXPECT_EQ(fit.tau, best_tau);
      EXPECT_EQ(fit.accuracy, best_hits / 10.0);
    }
  }
}

TEST(FitThreshold, IndependentLabelsGiveMajorityShare) {
  Rng rng(7);
  std::vector<double> s(4000);
  std::vector<int> y(4000);
  std::size_t fakes = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < 0.6 ? 1 : 0;
    fakes += static_cast<std::size_t>(y[i]);
  }
  const double majority = static_cast<double>(std::max(fakes, s.size() - fakes)) / static_cast<double>(s.size());
  const auto fit = fit_threshold(s, y, FireWhen::above);
  EXPECT_GE(fit.accuracy, majority);
  EXPECT_LT(fit.accuracy, majority + 0.03);
}

TEST(FitThreshold, DegenerateAndTooSmall) {
  const std::vector<double> same(12, 0.4);
  std::vector<int> y(12, 0);
  y[0] = 1;
  const auto fit = fit_threshold(same, y, FireWhen::above);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.tau, 0.4);
  EXPECT_THROW(fit_threshold(std::vector<double>(9, 0.1), std::vector<int>(9, 0), FireWhen::above), ValidationError);
}

// Eight hand-built news items; expected votes worked out by hand from the rules.
TEST(ApplyLabeling, HandBuiltCorpus) {
  data::Corpus c;
  for (int i = 1; i <= 8; ++i) c.news.push_back({"n" + std::to_string(i), "text", std::nullopt});
  c.users = {{"L1", {"lp1 lp2"}, {0, 0}},          {"R1", {"rp1 rp2"}, {100, 0}},
             {"N1", {"np1 np2"}, {0, 100}},        {"N2", {"np1"}, {100, 100}},
             {"B1", {"np1"}, {50, 50}},            {"B2", {"np1"}, {50, 50.1}},
             {"B3", {"np1"}, {50.1, 50}},          {"B4", {"np1"}, {50.1, 50.1}}};
  auto eng = [&](const char* n, const char* u, const char* t) { c.engagements.push_back({n, u, t, 0}); };
  eng("n1", "L1", "good");
  eng("n1", "R1", "bad");
  eng("n2", "N1", "good");
  eng("n2", "N2", "good");
  eng("n3", "B1", "good");
  eng("n3", "B2", "not good");
  eng("n4", "L1", "good");
  eng("n6", "B1", "meh");
  eng("n6", "B3", "meh");
  eng("n7", "R1", "good good bad");
  eng("n8", "N1", "not bad");
  eng("n8", "L1", "good");
  eng("n8", "B4", "good");
  c.validate();

  LabelingConfig cfg;
  cfg.lexicon = fixture_lexicon();
  cfg.seeds = SeedInterestSets::from_users(c, {"L1"}, {"R1"});
  cfg.thresholds.credibility = 0.5;
  cfg.cluster_cut = 1.0;
  const auto r = apply_labeling(c, cfg);
  EXPECT_EQ(r.news_without_engagements, 1u);

  auto labels = [&](Source s) {
    std::map<std::string, int> m;
    for (const auto& i : r.sets[static_cast<std::size_t>(s)].instances) m[i.news_id] = i.label;
    return m;
  };
  // n3: 0.8 and -0.8; n8: "not bad" flips to +0.8, "good" 0.8, so spread 0
  EXPECT_EQ(labels(Source::sentiment),
            (std::map<std::string, int>{{"n1", 1}, {"n2", 0}, {"n3", 1}, {"n6", 0}, {"n8", 0}}));
  // L1 = -1, R1 = +1, everyone else 0; n8 mean |.| = 1/3
  EXPECT_EQ(labels(Source::bias), (std::map<std::string, int>{
                                      {"n1", 1}, {"n2", 0}, {"n3", 0}, {"n4", 1}, {"n6", 0}, {"n7", 1}, {"n8", 0}}));
  // bots form one cluster of four (0.25 each); n8 mean (1 + 1 + 0.25) / 3 = 0.75
  EXPECT_EQ(labels(Source::credibility), (std::map<std::string, int>{
                                             {"n1", 0}, {"n2", 0}, {"n3", 1}, {"n4", 0}, {"n6", 1}, {"n7", 0}, {"n8", 0}}));
}

TEST(ApplyLabeling, NoEngagementsGivesEmptySets) {
  data::Corpus c;
  for (int i = 0; i < 3; ++i) c.news.push_back({"n" + std::to_string(i), "x", std::nullopt});
  c.users = {{"L", {"lp"}, {0}}, {"R", {"rp"}, {1}}};
  LabelingConfig cfg;
  cfg.seeds = SeedInterestSets::from_users(c, {"L"}, {"R"});
  const auto r = apply_labeling(c, cfg);
  EXPECT_EQ(r.news_without_engagements, 3u);
  for (const auto& s : r.sets) EXPECT_TRUE(s.instances.empty());
}

TEST(WeakSet, FileRoundTripAndDuplicates) {
  const auto dir = check::scratch_dir("weakset");
  WeakLabeledSet s;
  s.source = Source::bias;
  s.threshold = 0.35;
  s.instances = {{"a", 1}, {"b", 0}};
  save_weak_set(s, dir / "w.jsonl", "m");
  const auto back = load_weak_set(dir / "w.jsonl");
  EXPECT_EQ(back.source, Source::bias);
  EXPECT_EQ(back.threshold, 0.35);
  ASSERT_EQ(back.instances.size(), 2u);
  EXPECT_EQ(back.instances[1].news_id, "b");
  auto text = check::read_file(dir / "w.jsonl");
  std::ofstream(dir / "dup.jsonl") << text << R"({"news":"a","label":0})" << "\n";
  EXPECT_THROW(load_weak_set(dir / "dup.jsonl"), ValidationError);
}

TEST(SeedSets, RejectOverlapAndEmpty) {
  SeedInterestSets s;
  s.left = {{"a", 1.0}};
  s.right = {{"b", 1.0}};
  s.left_users = {"u1"};
  s.right_users = {"u1"};
  EXPECT_THROW(s.validate(), ValidationError);
  s.right_users = {"u2"};
  EXPECT_NO_THROW(s.validate());
  s.right.clear();
  EXPECT_THROW(s.validate(), ValidationError);
}
