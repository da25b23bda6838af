#include "mwss/weak_labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "internal/jsonl.hpp"
#include "mwss/errors.hpp"
#include "mwss/tokenizer.hpp"
#include "mwss/trainer.hpp"

namespace mwss::weak {
namespace {

using nlohmann::json;

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double norm(const InterestProfile& p) {
  double s = 0.0;
  for (const auto& [_, v] : p) s += v * v;
  return std::sqrt(s);
}

// Union-find over point indices.
struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::sentiment: return "sentiment";
    case Source::bias: return "bias";
    case Source::credibility: return "credibility";
  }
  return "?";
}

Source parse_source(std::string_view name) {
  for (auto s : kAllSources) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown weak source '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- sentiment

void Lexicon::set(std::string token, double valence) {
  if (!(valence >= -1.0 && valence <= 1.0)) {
    throw ValidationError("lexicon valence for '" + token + "' outside [-1, 1]");
  }
  valences_[std::move(token)] = valence;
}

void Lexicon::add_negation(std::string token) { negations_.insert(std::move(token)); }

double Lexicon::valence(std::string_view token) const {
  auto it = valences_.find(token);
  return it == valences_.end() ? 0.0 : it->second;
}

bool Lexicon::contains(std::string_view token) const { return valences_.find(token) != valences_.end(); }
bool Lexicon::is_negation(std::string_view token) const { return negations_.find(token) != negations_.end(); }

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon " + path.string());
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) io::fail_at(path, lineno, "expected token<TAB>valence");
    std::string token = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (value == "NEG") {
      lex.add_negation(std::move(token));
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      lex.set(std::move(token), v);
    } catch (const ValidationError& e) {
      io::fail_at(path, lineno, e.what());
    } catch (const std::exception&) {
      io::fail_at(path, lineno, "valence '" + value + "' is not a number");
    }
  }
  return lex;
}

void Lexicon::save(const std::filesystem::path& path, const std::string& manifest) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "# schema=mwss.lexicon/v1";
  if (!manifest.empty()) out << " manifest=" << manifest;
  out << '\n';
  for (const auto& n : negations_) out << n << "\tNEG\n";
  for (const auto& [tok, v] : valences_) out << tok << '\t' << json(v).dump() << '\n';
}

double sentiment_score(std::string_view text, const Lexicon& lexicon) {
  const auto words = text::split_words(text, true);
  double sum = 0.0;
  std::size_t matched = 0;
  std::size_t flip_left = 0;
  for (const auto& w : words) {
    if (lexicon.is_negation(w)) {
      flip_left = kNegationWindow;
      continue;
    }
    if (lexicon.contains(w)) {
      const double v = lexicon.valence(w);
      sum += flip_left > 0 ? -v : v;
      ++matched;
    }
    if (flip_left > 0) --flip_left;
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

std::optional<double> sentiment_spread(std::span<const double> scores) {
  if (scores.size() < 2) return std::nullopt;
  const double m = mean(scores);
  double ss = 0.0;
  for (double s : scores) ss += (s - m) * (s - m);
  return std::sqrt(ss / static_cast<double>(scores.size()));
}

Vote sentiment_label(std::span<const double> scores, double tau1) {
  const auto spread = sentiment_spread(scores);
  if (!spread) return Vote::abstain;
  return *spread > tau1 ? Vote::fake : Vote::real;
}

// --------------------------------------------------------------------- bias

InterestProfile build_profile(std::span<const std::string> texts) {
  InterestProfile p;
  std::size_t total = 0;
  for (const auto& t : texts) {
    for (auto& w : text::split_words(t, true)) {
      p[w] += 1.0;
      ++total;
    }
  }
  for (auto& [_, v] : p) v /= static_cast<double>(total);
  return p;
}

double cosine(const InterestProfile& a, const InterestProfile& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  double d = 0.0;
  for (const auto& [tok, v] : small) {
    auto it = large.find(tok);
    if (it != large.end()) d += v * it->second;
  }
  return d / (na * nb);
}

SeedInterestSets SeedInterestSets::from_users(const data::Corpus& corpus, std::vector<std::string> left_users,
                                              std::vector<std::string> right_users) {
  std::unordered_map<std::string, const data::UserProfile*> by_id;
  for (const auto& u : corpus.users) by_id.emplace(u.id, &u);
  auto collect = [&](const std::vector<std::string>& ids) {
    std::vector<std::string> texts;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("seed user '" + id + "' is not in the corpus");
      texts.insert(texts.end(), it->second->history.begin(), it->second->history.end());
    }
    return build_profile(texts);
  };
  SeedInterestSets s{collect(left_users), collect(right_users), std::move(left_users), std::move(right_users)};
  s.validate();
  return s;
}

void SeedInterestSets::validate() const {
  if (left.empty() || right.empty()) throw ValidationError("seed interest profiles must be non-empty");
  for (const auto& l : left_users) {
    if (std::find(right_users.begin(), right_users.end(), l) != right_users.end()) {
      throw ValidationError("seed user '" + l + "' appears on both sides");
    }
  }
}

SeedInterestSets SeedInterestSets::load(const std::filesystem::path& path, const data::Corpus& corpus) {
  std::vector<std::string> left, right;
  io::read_jsonl(path, "mwss.seeds", [&](const json& r, std::size_t line) {
    const auto side = r.at("side").get<std::string>();
    auto users = r.at("users").get<std::vector<std::string>>();
    if (side == "left") {
      left.insert(left.end(), users.begin(), users.end());
    } else if (side == "right") {
      right.insert(right.end(), users.begin(), users.end());
    } else {
      io::fail_at(path, line, "side must be left or right");
    }
  });
  return from_users(corpus, std::move(left), std::move(right));
}

void SeedInterestSets::save(const std::filesystem::path& path, const std::string& manifest) const {
  auto out = io::open_output(path, "mwss.seeds");
  out << io::header("mwss.seeds", manifest).dump() << '\n';
  out << json{{"side", "left"}, {"users", left_users}}.dump() << '\n';
  out << json{{"side", "right"}, {"users", right_users}}.dump() << '\n';
}

double bias_score(std::span<const std::string> history, const SeedInterestSets& seeds) {
  if (history.empty()) return 0.0;
  const auto p = build_profile(history);
  if (p.empty()) return 0.0;
  return std::clamp(cosine(p, seeds.right) - cosine(p, seeds.left), -1.0, 1.0);
}

Vote bias_label(std::span<const double> scores, double tau2) {
  if (scores.empty()) return Vote::abstain;
  double s = 0.0;
  for (double x : scores) s += std::abs(x);
  return s / static_cast<double>(scores.size()) > tau2 ? Vote::fake : Vote::real;
}

// -------------------------------------------------------------- credibility

std::vector<std::size_t> cluster_users(std::span<const std::vector<double>> features, double cut) {
  const std::size_t n = features.size();
  if (n == 0) return {};
  const std::size_t dim = features[0].size();
  for (const auto& f : features) {
    if (f.size() != dim) {
      throw ValidationError("user feature vectors differ in dimension (" + std::to_string(f.size()) + " vs " +
                            std::to_string(dim) + ")");
    }
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) s += (features[i][c] - features[j][c]) * (features[i][c] - features[j][c]);
      dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
    }
  }

  // Nearest-neighbour chain; valid for average linkage because it never produces inversions.
  struct Merge {
    std::size_t a, b;
    double d;
  };
  std::vector<Merge> merges;
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> chain;
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      chain.push_back(static_cast<std::size_t>(std::find(active.begin(), active.end(), true) - active.begin()));
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : npos;
    std::size_t best = prev;
    double bd = prev == npos ? std::numeric_limits<double>::infinity() : dist[a * n + prev];
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      if (dist[a * n + c] < bd) {
        bd = dist[a * n + c];
        best = c;
      }
    }
    if (best != prev) {
      chain.push_back(best);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    merges.push_back({a, prev, bd});
    const double sa = static_cast<double>(size[a]);
    const double sp = static_cast<double>(size[prev]);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a || c == prev) continue;
      const double d = (sa * dist[a * n + c] + sp * dist[prev * n + c]) / (sa + sp);
      dist[prev * n + c] = dist[c * n + prev] = d;
    }
    size[prev] += size[a];
    active[a] = false;
    --remaining;
  }

  DisjointSets sets(n);
  for (const auto& m : merges) {
    if (m.d <= cut) sets.unite(m.a, m.b);
  }
  std::vector<std::size_t> ids(n);
  std::unordered_map<std::size_t, std::size_t> dense;
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = dense.emplace(sets.find(i), dense.size()).first->second;
  }
  return ids;
}

std::vector<double> credibility_scores(std::span<const std::vector<double>> features, double cut) {
  const auto ids = cluster_users(features, cut);
  std::vector<std::size_t> counts(ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1, 0);
  for (auto id : ids) ++counts[id];
  std::vector<double> cred(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) cred[i] = 1.0 / static_cast<double>(counts[ids[i]]);
  return cred;
}

Vote credibility_label(std::span<const double> credibilities, double tau3) {
  if (credibilities.empty()) return Vote::abstain;
  return mean(credibilities) < tau3 ? Vote::fake : Vote::real;
}

// --------------------------------------------------------- threshold fitting

FireWhen fire_direction(Source s) { return s == Source::credibility ? FireWhen::below : FireWhen::above; }

ThresholdFit fit_threshold(std::span<const double> statistics, std::span<const int> labels, FireWhen when) {
  if (statistics.size() != labels.size()) throw ValidationError("fit_threshold: statistics and labels differ in length");
  if (statistics.size() < 10) throw ValidationError("fit_threshold: needs at least 10 labeled news");
  const auto accuracy_at = [&](double tau) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < statistics.size(); ++i) {
      const bool fires = when == FireWhen::above ? statistics[i] > tau : statistics[i] < tau;
      if ((fires ? 1 : 0) == labels[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(statistics.size());
  };
  if (std::all_of(statistics.begin(), statistics.end(), [&](double s) { return s == statistics[0]; })) {
    return {statistics[0], accuracy_at(statistics[0]), true};
  }
  ThresholdFit best{0.0, -1.0, false};
  const int steps = static_cast<int>(std::lround(1.0 / kThresholdGridStep));
  for (int i = 0; i <= steps; ++i) {
    const double tau = i * kThresholdGridStep;
    const double acc = accuracy_at(tau);
    if (acc > best.accuracy) best = {tau, acc, false};
  }
  return best;
}

// ---------------------------------------------------------------- pipeline

double Thresholds::of(Source s) const {
  switch (s) {
    case Source::sentiment: return sentiment;
    case Source::bias: return bias;
    case Source::credibility: return credibility;
  }
  return 0.0;
}

void Thresholds::set(Source s, double v) {
  switch (s) {
    case Source::sentiment: sentiment = v; break;
    case Source::bias: bias = v; break;
    case Source::credibility: credibility = v; break;
  }
}

std::optional<double> NewsStatistics::of(Source s) const {
  switch (s) {
    case Source::sentiment: return sentiment_spread;
    case Source::bias: return bias_mean_abs;
    case Source::credibility: return credibility_mean;
  }
  return std::nullopt;
}

std::vector<NewsStatistics> compute_statistics(const data::Corpus& corpus, const LabelingConfig& config) {
  config.seeds.validate();
  std::unordered_map<std::string, std::size_t> user_index;
  for (std::size_t i = 0; i < corpus.users.size(); ++i) user_index.emplace(corpus.users[i].id, i);

  // Only users that engaged with something take part in clustering.
  std::vector<std::size_t> engaged;
  std::vector<int> slot(corpus.users.size(), -1);
  for (const auto& e : corpus.engagements) {
    auto it = user_index.find(e.user_id);
    if (it == user_index.end()) throw ValidationError("engagement references unknown user '" + e.user_id + "'");
    if (slot[it->second] < 0) {
      slot[it->second] = static_cast<int>(engaged.size());
      engaged.push_back(it->second);
    }
  }
  std::vector<std::vector<double>> features;
  std::vector<double> bias(engaged.size());
  features.reserve(engaged.size());
  for (std::size_t j = 0; j < engaged.size(); ++j) {
    const auto& u = corpus.users[engaged[j]];
    features.push_back(u.meta);
    bias[j] = bias_score(u.history, config.seeds);
  }
  const auto cred = credibility_scores(features, config.cluster_cut);

  struct Acc {
    std::vector<double> sentiments;
    std::vector<std::size_t> users;
  };
  std::map<std::string, Acc> per_news;
  for (const auto& n : corpus.news) per_news[n.id];
  for (const auto& e : corpus.engagements) {
    auto& acc = per_news[e.news_id];
    acc.sentiments.push_back(sentiment_score(e.text, config.lexicon));
    acc.users.push_back(static_cast<std::size_t>(slot[user_index.at(e.user_id)]));
  }

  std::vector<NewsStatistics> out;
  out.reserve(per_news.size());
  for (auto& [id, acc] : per_news) {
    NewsStatistics s;
    s.news_id = id;
    s.sentiment_spread = sentiment_spread(acc.sentiments);
    std::sort(acc.users.begin(), acc.users.end());
    acc.users.erase(std::unique(acc.users.begin(), acc.users.end()), acc.users.end());
    if (!acc.users.empty()) {
      double b = 0.0;
      double c = 0.0;
      for (auto u : acc.users) {
        b += std::abs(bias[u]);
        c += cred[u];
      }
      s.bias_mean_abs = b / static_cast<double>(acc.users.size());
      s.credibility_mean = c / static_cast<double>(acc.users.size());
    }
    out.push_back(std::move(s));
  }
  return out;
}

Vote vote_for(Source s, const NewsStatistics& stats, const Thresholds& thresholds) {
  const auto v = stats.of(s);
  if (!v) return Vote::abstain;
  const double tau = thresholds.of(s);
  const bool fires = fire_direction(s) == FireWhen::above ? *v > tau : *v < tau;
  return fires ? Vote::fake : Vote::real;
}

namespace {

SourceQuality score_votes(Source s, const std::string& scope, const std::vector<std::pair<Vote, int>>& votes) {
  SourceQuality q;
  q.source = s;
  q.scope = scope;
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto& [v, truth] : votes) {
    if (v == Vote::abstain) continue;
    probs.push_back(v == Vote::fake ? 1.0 : 0.0);
    labels.push_back(truth);
  }
  q.evaluated = probs.size();
  q.coverage = votes.empty() ? 0.0 : static_cast<double>(probs.size()) / static_cast<double>(votes.size());
  if (!probs.empty()) {
    const auto m = meta::metrics_from_predictions(probs, labels);
    q.accuracy = m.accuracy;
    q.f1 = m.f1;
  }
  return q;
}

}  // namespace

LabelingResult apply_labeling(const data::Corpus& corpus, const LabelingConfig& config,
                              const std::vector<data::LabeledId>* truth) {
  const auto stats = compute_statistics(corpus, config);
  std::unordered_map<std::string, const data::NewsArticle*> news;
  for (const auto& n : corpus.news) news.emplace(n.id, &n);
  std::unordered_map<std::string, int> truth_of;
  if (truth) {
    for (const auto& t : *truth) truth_of.emplace(t.id, t.label);
  }

  LabelingResult out;
  for (const auto& s : stats) {
    if (!s.sentiment_spread && !s.bias_mean_abs && !s.credibility_mean) ++out.news_without_engagements;
  }
  for (auto src : kAllSources) {
    WeakLabeledSet set;
    set.source = src;
    set.threshold = config.thresholds.of(src);
    std::vector<std::pair<Vote, int>> clean_votes, truth_votes;
    for (const auto& s : stats) {
      const Vote v = vote_for(src, s, config.thresholds);
      const auto* article = news.at(s.news_id);
      if (article->label) {
        clean_votes.emplace_back(v, *article->label);
        continue;
      }
      if (v == Vote::abstain) continue;
      set.instances.push_back({s.news_id, v == Vote::fake ? 1 : 0});
      if (truth) {
        auto it = truth_of.find(s.news_id);
        if (it != truth_of.end()) truth_votes.emplace_back(v, it->second);
      }
    }
    if (!clean_votes.empty()) {
      set.quality = score_votes(src, "clean", clean_votes);
      out.quality.push_back(*set.quality);
    }
    if (truth && !truth_votes.empty()) out.quality.push_back(score_votes(src, "truth", truth_votes));
    out.sets.push_back(std::move(set));
  }
  return out;
}

std::map<Source, ThresholdFit> fit_thresholds(const std::vector<NewsStatistics>& stats,
                                              const std::vector<data::LabeledId>& clean_train) {
  std::unordered_map<std::string, const NewsStatistics*> by_id;
  for (const auto& s : stats) by_id.emplace(s.news_id, &s);
  std::map<Source, ThresholdFit> fits;
  for (auto src : kAllSources) {
    std::vector<double> values;
    std::vector<int> labels;
    for (const auto& c : clean_train) {
      auto it = by_id.find(c.id);
      if (it == by_id.end()) continue;
      if (auto v = it->second->of(src)) {
        values.push_back(*v);
        labels.push_back(c.label);
      }
    }
    fits.emplace(src, fit_threshold(values, labels, fire_direction(src)));
  }
  return fits;
}

void save_weak_set(const WeakLabeledSet& set, const std::filesystem::path& path, const std::string& manifest) {
  auto out = io::open_output(path, "mwss.weak");
  auto h = io::header("mwss.weak", manifest);
  h["source"] = std::string(to_string(set.source));
  h["threshold"] = set.threshold;
  out << h.dump() << '\n';
  for (const auto& inst : set.instances) out << json{{"news", inst.news_id}, {"label", inst.label}}.dump() << '\n';
}

WeakLabeledSet load_weak_set(const std::filesystem::path& path) {
  WeakLabeledSet set;
  std::unordered_map<std::string, int> seen;
  const auto head = io::read_jsonl(path, "mwss.weak", [&](const json& r, std::size_t line) {
    WeakInstance inst{r.at("news").get<std::string>(), r.at("label").get<int>()};
    if (inst.label != 0 && inst.label != 1) io::fail_at(path, line, "weak label must be 0 or 1");
    if (!seen.emplace(inst.news_id, inst.label).second) io::fail_at(path, line, "duplicate news id " + inst.news_id);
    set.instances.push_back(std::move(inst));
  });
  set.source = parse_source(head.at("source").get<std::string>());
  set.threshold = head.value("threshold", 0.0);
  return set;
}

}  // namespace mwss::weak
