#include "mwss/corpus.hpp"

#include <set>
#include <unordered_set>

#include "internal/jsonl.hpp"
#include "mwss/errors.hpp"

namespace mwss::data {
namespace {

using nlohmann::json;

std::string list_ids(const std::vector<std::string>& ids) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

template <typename T, typename Key>
void require_unique(const std::vector<T>& items, Key key, const char* what) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> dup;
  for (const auto& it : items) {
    if (!seen.insert(key(it)).second) dup.push_back(key(it));
  }
  if (!dup.empty()) throw ValidationError(std::string("duplicate ") + what + " ids: " + list_ids(dup));
}

}  // namespace

void Corpus::validate() const {
  require_unique(news, [](const NewsArticle& n) { return n.id; }, "news");
  require_unique(users, [](const UserProfile& u) { return u.id; }, "user");
  for (const auto& n : news) {
    if (n.label && *n.label != 0 && *n.label != 1) throw ValidationError("news " + n.id + " has a label outside {0,1}");
  }
  std::unordered_set<std::string> news_ids, user_ids;
  for (const auto& n : news) news_ids.insert(n.id);
  for (const auto& u : users) user_ids.insert(u.id);
  std::set<std::string> missing_news, missing_users;
  for (const auto& e : engagements) {
    if (!news_ids.contains(e.news_id)) missing_news.insert(e.news_id);
    if (!user_ids.contains(e.user_id)) missing_users.insert(e.user_id);
  }
  if (!missing_news.empty()) {
    throw ValidationError("engagements reference unknown news ids: " +
                          list_ids({missing_news.begin(), missing_news.end()}));
  }
  if (!missing_users.empty()) {
    throw ValidationError("engagements reference unknown user ids: " +
                          list_ids({missing_users.begin(), missing_users.end()}));
  }
}

CorpusPaths CorpusPaths::in(const std::filesystem::path& dir) {
  return {dir / "news.jsonl", dir / "engagements.jsonl", dir / "users.jsonl"};
}

Corpus load_corpus(const CorpusPaths& paths) {
  Corpus c;
  io::read_jsonl(paths.news, "mwss.news", [&](const json& r, std::size_t line) {
    NewsArticle n;
    n.id = r.at("id").get<std::string>();
    n.text = r.value("text", "");
    if (r.contains("label") && !r["label"].is_null()) {
      const int l = r["label"].get<int>();
      if (l != 0 && l != 1) io::fail_at(paths.news, line, "label must be 0, 1 or null");
      n.label = l;
    }
    c.news.push_back(std::move(n));
  });
  io::read_jsonl(paths.engagements, "mwss.engagements", [&](const json& r, std::size_t) {
    c.engagements.push_back(Engagement{r.at("news").get<std::string>(), r.at("user").get<std::string>(),
                                       r.value("text", ""), r.value("ts", std::int64_t{0})});
  });
  io::read_jsonl(paths.users, "mwss.users", [&](const json& r, std::size_t) {
    UserProfile u;
    u.id = r.at("id").get<std::string>();
    u.history = r.value("history", std::vector<std::string>{});
    u.meta = r.value("meta", std::vector<double>{});
    c.users.push_back(std::move(u));
  });
  c.validate();
  return c;
}

void save_corpus(const Corpus& corpus, const CorpusPaths& paths, const std::string& manifest) {
  {
    auto out = io::open_output(paths.news, "mwss.news");
    out << io::header("mwss.news", manifest).dump() << '\n';
    for (const auto& n : corpus.news) {
      json r{{"id", n.id}, {"text", n.text}, {"label", n.label ? json(*n.label) : json(nullptr)}};
      out << r.dump() << '\n';
    }
  }
  {
    auto out = io::open_output(paths.engagements, "mwss.engagements");
    out << io::header("mwss.engagements", manifest).dump() << '\n';
    for (const auto& e : corpus.engagements) {
      out << json{{"news", e.news_id}, {"user", e.user_id}, {"text", e.text}, {"ts", e.timestamp}}.dump() << '\n';
    }
  }
  {
    auto out = io::open_output(paths.users, "mwss.users");
    out << io::header("mwss.users", manifest).dump() << '\n';
    for (const auto& u : corpus.users) {
      out << json{{"id", u.id}, {"history", u.history}, {"meta", u.meta}}.dump() << '\n';
    }
  }
}

std::vector<LabeledId> load_truth(const std::filesystem::path& path) {
  std::vector<LabeledId> truth;
  io::read_jsonl(path, "mwss.truth", [&](const json& r, std::size_t line) {
    const int l = r.at("label").get<int>();
    if (l != 0 && l != 1) io::fail_at(path, line, "label must be 0 or 1");
    truth.push_back({r.at("id").get<std::string>(), l});
  });
  return truth;
}

void save_truth(const std::vector<LabeledId>& truth, const std::filesystem::path& path, const std::string& manifest) {
  auto out = io::open_output(path, "mwss.truth");
  out << io::header("mwss.truth", manifest).dump() << '\n';
  for (const auto& t : truth) out << json{{"id", t.id}, {"label", t.label}}.dump() << '\n';
}

}  // namespace mwss::data
