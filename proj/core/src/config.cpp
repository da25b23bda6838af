#include "mwss/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mwss/errors.hpp"
#include "mwss/hash.hpp"

namespace mwss::harness {
namespace {

namespace pt = boost::property_tree;

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ValidationError("config " + key + ": '" + s + "' is not a valid number");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& name, const std::string&)> set;
};

#define MWSS_SIZE(sec, key, expr)                                                                    \
  Field{sec, key, [](const RunConfig& c) { return std::to_string(c.expr); },                         \
        [](RunConfig& c, const std::string& n, const std::string& s) { c.expr = parse_number<std::size_t>(n, s); }}
#define MWSS_U64(sec, key, expr)                                                                     \
  Field{sec, key, [](const RunConfig& c) { return std::to_string(c.expr); },                         \
        [](RunConfig& c, const std::string& n, const std::string& s) { c.expr = parse_number<std::uint64_t>(n, s); }}
#define MWSS_REAL(sec, key, expr)                                                                    \
  Field{sec, key, [](const RunConfig& c) { return fmt(c.expr); },                                    \
        [](RunConfig& c, const std::string& n, const std::string& s) { c.expr = parse_number<double>(n, s); }}

std::vector<std::size_t> parse_sizes(const std::string& name, const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& p : split_list(s)) out.push_back(parse_number<std::size_t>(name, p));
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

bool parse_bool(const std::string& name, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("config " + name + ": '" + s + "' is not true/false");
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      MWSS_SIZE("synth", "n_clean", synth.n_clean),
      MWSS_SIZE("synth", "n_unlabeled", synth.n_unlabeled),
      MWSS_REAL("synth", "fake_share", synth.fake_share),
      MWSS_REAL("synth", "rho_sentiment", synth.rho[0]),
      MWSS_REAL("synth", "rho_bias", synth.rho[1]),
      MWSS_REAL("synth", "rho_credibility", synth.rho[2]),
      MWSS_REAL("synth", "noise_focus", synth.noise_focus),
      MWSS_REAL("synth", "real_flip_share", synth.real_flip_share),
      MWSS_SIZE("synth", "blind_topics", synth.blind_topics),
      MWSS_U64("synth", "seed", synth.seed),
      MWSS_SIZE("synth", "class_vocab", synth.class_vocab),
      MWSS_SIZE("synth", "topics", synth.topics),
      MWSS_SIZE("synth", "topic_vocab", synth.topic_vocab),
      MWSS_SIZE("synth", "filler_vocab", synth.filler_vocab),
      MWSS_SIZE("synth", "min_length", synth.min_length),
      MWSS_SIZE("synth", "max_length", synth.max_length),
      MWSS_REAL("synth", "signal_share", synth.signal_share),
      MWSS_REAL("synth", "topic_share", synth.topic_share),
      MWSS_REAL("synth", "topic_class_share", synth.topic_class_share),
      MWSS_SIZE("synth", "min_engagements", synth.min_engagements),
      MWSS_SIZE("synth", "max_engagements", synth.max_engagements),
      MWSS_SIZE("synth", "humans_per_group", synth.humans_per_group),
      MWSS_SIZE("synth", "bot_clusters_per_group", synth.bot_clusters_per_group),
      MWSS_SIZE("synth", "bot_cluster_size", synth.bot_cluster_size),
      MWSS_SIZE("synth", "seed_users_per_side", synth.seed_users_per_side),
      MWSS_SIZE("synth", "history_texts", synth.history_texts),
      MWSS_SIZE("synth", "political_vocab", synth.political_vocab),

      MWSS_SIZE("tokenizer", "max_length", tokenizer.max_length),
      MWSS_SIZE("tokenizer", "vocab_size", tokenizer.vocab_size),
      Field{"tokenizer", "lowercase", [](const RunConfig& c) { return std::string(c.tokenizer.lowercase ? "true" : "false"); },
            [](RunConfig& c, const std::string& n, const std::string& s) { c.tokenizer.lowercase = parse_bool(n, s); }},

      Field{"encoder", "variant", [](const RunConfig& c) { return std::string(text::to_string(c.model.encoder.variant)); },
            [](RunConfig& c, const std::string&, const std::string& s) {
              c.model.encoder.variant = text::parse_encoder_variant(s);
            }},
      MWSS_SIZE("encoder", "embed_dim", model.encoder.embed_dim),
      Field{"encoder", "filter_widths", [](const RunConfig& c) { return join_sizes(c.model.encoder.filter_widths); },
            [](RunConfig& c, const std::string& n, const std::string& s) {
              c.model.encoder.filter_widths = parse_sizes(n, s);
            }},
      MWSS_SIZE("encoder", "filters_per_width", model.encoder.filters_per_width),

      MWSS_SIZE("model", "head_hidden", model.head_hidden),
      Field{"model", "sharing", [](const RunConfig& c) { return std::string(model::to_string(c.model.sharing)); },
            [](RunConfig& c, const std::string&, const std::string& s) { c.model.sharing = model::parse_head_sharing(s); }},
      MWSS_SIZE("model", "label_embed_dim", model.label_embed_dim),
      Field{"model", "lwn_hidden", [](const RunConfig& c) { return join_sizes(c.model.lwn_hidden); },
            [](RunConfig& c, const std::string& n, const std::string& s) { c.model.lwn_hidden = parse_sizes(n, s); }},

      MWSS_REAL("train", "lr_theta", train.lr_theta),
      MWSS_REAL("train", "lr_alpha", train.lr_alpha),
      MWSS_SIZE("train", "batch_clean", train.batch_clean),
      MWSS_SIZE("train", "batch_weak", train.batch_weak),
      MWSS_SIZE("train", "batch_val", train.batch_val),
      MWSS_SIZE("train", "epochs", train.epochs),
      MWSS_SIZE("train", "max_steps", train.max_steps),
      MWSS_REAL("train", "fd_scale", train.fd_scale),
      MWSS_U64("train", "seed", train.seed),
      MWSS_SIZE("train", "eval_every", train.eval_every),
      MWSS_REAL("train", "adam_beta1", train.adam.beta1),
      MWSS_REAL("train", "adam_beta2", train.adam.beta2),
      MWSS_REAL("train", "adam_eps", train.adam.epsilon),

      MWSS_REAL("labeling", "tau_sentiment", thresholds.sentiment),
      MWSS_REAL("labeling", "tau_bias", thresholds.bias),
      MWSS_REAL("labeling", "tau_credibility", thresholds.credibility),
      MWSS_REAL("labeling", "cluster_cut", cluster_cut),
      Field{"labeling", "majority_tie", [](const RunConfig& c) { return std::to_string(c.majority_tie); },
            [](RunConfig& c, const std::string& n, const std::string& s) { c.majority_tie = parse_number<int>(n, s); }},

      MWSS_REAL("experiment", "clean_ratio", clean_ratio),
      MWSS_U64("experiment", "split_seed", split_seed),
      Field{"experiment", "sources",
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.sources.size(); ++i) s += (i ? "," : "") + std::string(weak::to_string(c.sources[i]));
              return s;
            },
            [](RunConfig& c, const std::string&, const std::string& s) {
              c.sources.clear();
              for (const auto& p : split_list(s)) c.sources.push_back(weak::parse_source(p));
            }},
  };
  return all;
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  tokenizer.validate();
  if (model.encoder.vocab_size != tokenizer.vocab_size) {
    throw ValidationError("encoder vocabulary must match tokenizer.vocab_size");
  }
  model.validate();
  train.validate();
  if (sources.empty()) throw ValidationError("experiment.sources must name at least one source");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (sources[i] == sources[j]) throw ValidationError("experiment.sources lists a source twice");
    }
  }
  if (model.num_sources != sources.size()) throw ValidationError("model.num_sources must equal the number of sources");
  if (clean_ratio != 0.0 && !(clean_ratio > 0.0 && clean_ratio < 1.0)) {
    throw ValidationError("experiment.clean_ratio must be 0 or lie in (0, 1)");
  }
  if (majority_tie != 0 && majority_tie != 1) throw ValidationError("labeling.majority_tie must be 0 or 1");
  if (!(cluster_cut >= 0.0)) throw ValidationError("labeling.cluster_cut must be non-negative");
}

RunConfig parse_config(const std::string& ini_text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError(origin + ": key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      const auto& all = fields();
      auto it = std::find_if(all.begin(), all.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == all.end()) throw ValidationError(origin + ": unknown key " + section + "." + key);
      it->set(c, section + "." + key, value.data());
    }
  }
  c.model.encoder.vocab_size = c.tokenizer.vocab_size;
  c.model.num_sources = c.sources.size();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_ini(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) { return hex64(fnv1a(to_ini(config))); }

}  // namespace mwss::harness
