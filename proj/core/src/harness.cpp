#include "mwss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "internal/csv.hpp"
#include "internal/jsonl.hpp"
#include "mwss/baselines.hpp"
#include "mwss/checkpoint.hpp"
#include "mwss/errors.hpp"
#include "mwss/hash.hpp"
#include "mwss/synth.hpp"

namespace mwss::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string weak_file(weak::Source s) { return "weak_" + std::string(weak::to_string(s)) + ".jsonl"; }

// Identity of a command invocation. Timing is kept out of the hash.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config, json args,
           const std::vector<std::pair<std::string, std::string>>& inputs)
      : start_(std::chrono::steady_clock::now()) {
    body_ = json{{"command", std::move(command)}, {"config", to_ini(config)}, {"args", std::move(args)}};
    json in = json::object();
    for (const auto& [name, digest] : inputs) in[name] = digest;
    body_["inputs"] = in;
    hash_ = hex64(fnv1a(body_.dump()));
  }

  const std::string& hash() const { return hash_; }
  void artifact(const fs::path& p) { artifacts_.push_back(p.filename().string()); }

  void write(const fs::path& dir) const {
    json m = body_;
    m["schema"] = "mwss.manifest";
    m["version"] = data::kSchemaVersion;
    m["manifest"] = hash_;
    m["artifacts"] = artifacts_;
    m["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto out = io::open_output(dir / "manifest.json", "mwss.manifest");
    out << m.dump() << '\n';
  }

 private:
  json body_;
  std::string hash_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<data::LabeledId> clean_items(const data::Corpus& corpus) {
  std::vector<data::LabeledId> out;
  for (const auto& n : corpus.news) {
    if (n.label) out.push_back({n.id, *n.label});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> corpus_digests(const fs::path& dir) {
  const auto p = data::CorpusPaths::in(dir);
  return {{"news.jsonl", file_digest(p.news)},
          {"engagements.jsonl", file_digest(p.engagements)},
          {"users.jsonl", file_digest(p.users)}};
}

std::vector<std::string> weight_columns(const std::vector<weak::Source>& sources) {
  std::vector<std::string> c;
  for (auto s : sources) c.push_back("mean_weight_" + std::string(weak::to_string(s)));
  return c;
}

baselines::BaselineMode baseline_of(Method m) {
  switch (m) {
    case Method::clean: return baselines::BaselineMode::clean_only;
    case Method::weak: return baselines::BaselineMode::weak_only;
    case Method::merged: return baselines::BaselineMode::clean_plus_weak;
    case Method::majority: return baselines::BaselineMode::majority_vote_merge;
    case Method::mwss: break;
  }
  throw std::logic_error("mwss has no baseline mode");
}

double source_mean_weight(const model::ModelSpec& spec, const nn::ParamVector& theta, const nn::ParamVector& alpha,
                          const std::vector<model::Example>& set) {
  if (set.empty()) return 0.0;
  double s = 0.0;
  for (const auto& ex : set) {
    const auto h = text::encode(spec.encoder, theta, ex.tokens).h;
    s += model::lwn_weight(spec, alpha, h, ex.label);
  }
  return s / static_cast<double>(set.size());
}

}  // namespace

Method parse_method(std::string_view name) {
  for (auto m : {Method::mwss, Method::clean, Method::weak, Method::merged, Method::majority}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown mode '" + std::string(name) + "' (expected mwss, clean, weak, merged or majority)");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::mwss: return "mwss";
    case Method::clean: return "clean";
    case Method::weak: return "weak";
    case Method::merged: return "merged";
    case Method::majority: return "majority";
  }
  return "?";
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

Experiment load_experiment(const RunConfig& config, const fs::path& corpus_dir, const fs::path& weak_dir) {
  config.validate();
  Experiment exp;
  exp.config = config;
  const auto corpus = data::load_corpus(data::CorpusPaths::in(corpus_dir));
  exp.inputs = corpus_digests(corpus_dir);

  std::unordered_map<std::string, const data::NewsArticle*> by_id;
  for (const auto& n : corpus.news) by_id.emplace(n.id, &n);
  auto example = [&](const std::string& id, int label) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("weak set references unknown news id " + id);
    return model::Example{id, text::tokenize(it->second->text, config.tokenizer), label};
  };

  exp.split = data::split_clean(clean_items(corpus), config.split_seed);
  for (const auto& c : exp.split.train) exp.train_pool.push_back(example(c.id, c.label));
  for (const auto& c : exp.split.val) exp.val.push_back(example(c.id, c.label));
  for (const auto& c : exp.split.test) exp.test.push_back(example(c.id, c.label));

  std::set<std::string> weak_ids;
  for (auto src : config.sources) {
    const auto path = weak_dir / weak_file(src);
    const auto set = weak::load_weak_set(path);
    if (set.source != src) {
      throw ValidationError(path.string() + " holds source " + std::string(weak::to_string(set.source)));
    }
    exp.inputs.emplace_back(weak_file(src), file_digest(path));
    auto& examples = exp.weak.emplace_back();
    for (const auto& inst : set.instances) {
      examples.push_back(example(inst.news_id, inst.label));
      weak_ids.insert(inst.news_id);
    }
  }
  const std::vector<std::string> ids(weak_ids.begin(), weak_ids.end());
  data::assert_no_leak(exp.split.test, ids);
  exp.weak_count = ids.size();
  return exp;
}

RunOutcome run_method(const Experiment& exp, Method method, std::uint64_t seed, std::optional<double> ratio) {
  const auto& cfg = exp.config;
  RunOutcome out;
  out.method = method;
  out.seed = seed;
  out.ratio = ratio.value_or(cfg.clean_ratio);

  meta::Datasets data;
  data.clean_val = exp.val;
  data.weak = exp.weak;
  if (out.ratio > 0.0) {
    const auto chosen = data::mix_by_clean_ratio(exp.split.train, exp.weak_count, out.ratio, seed);
    std::unordered_set<std::string> keep;
    for (const auto& c : chosen) keep.insert(c.id);
    for (const auto& ex : exp.train_pool) {
      if (keep.contains(ex.id)) data.clean_train.push_back(ex);
    }
  } else {
    data.clean_train = exp.train_pool;
  }
  out.clean_used = method == Method::weak ? 0 : data.clean_train.size();

  meta::TrainConfig train = cfg.train;
  train.seed = seed;
  model::InferenceHead head = model::InferenceHead::clean;
  if (method == Method::mwss) {
    out.spec = cfg.model;
    out.result = meta::train(out.spec, train, data);
    head = train.inference;
  } else {
    const auto run = baselines::prepare(baseline_of(method), cfg.model, train, data, cfg.majority_tie);
    out.spec = run.spec;
    out.result = meta::train(run.spec, run.config, run.data);
    head = run.config.inference;
  }
  out.test = meta::evaluate(out.spec, out.result.theta, exp.test, head);
  if (method == Method::mwss) {
    for (const auto& set : exp.weak) {
      out.mean_weight.push_back(source_mean_weight(out.spec, out.result.theta, out.result.alpha, set));
    }
  }
  return out;
}

// ------------------------------------------------------------------ commands

void cmd_synth(const RunConfig& config, const fs::path& out) {
  config.synth.validate();
  Manifest m("synth", config, json{{"seed", config.synth.seed}}, {});
  const auto s = data::synth_generate(config.synth);
  const auto paths = data::CorpusPaths::in(out);
  data::save_corpus(s.corpus, paths, m.hash());
  data::save_truth(s.truth, out / "truth.jsonl", m.hash());
  s.lexicon.save(out / "lexicon.tsv", m.hash());
  weak::SeedInterestSets seeds;
  seeds.left_users = s.left_seeds;
  seeds.right_users = s.right_seeds;
  seeds.save(out / "seeds.jsonl", m.hash());
  for (const auto& p : {paths.news, paths.engagements, paths.users}) m.artifact(p);
  for (const char* f : {"truth.jsonl", "lexicon.tsv", "seeds.jsonl"}) m.artifact(out / f);
  m.write(out);
}

WeaklabelReport cmd_weaklabel(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out, bool fit) {
  const auto corpus = data::load_corpus(data::CorpusPaths::in(corpus_dir));
  auto inputs = corpus_digests(corpus_dir);
  inputs.emplace_back("lexicon.tsv", file_digest(corpus_dir / "lexicon.tsv"));
  inputs.emplace_back("seeds.jsonl", file_digest(corpus_dir / "seeds.jsonl"));
  std::optional<std::vector<data::LabeledId>> truth;
  if (fs::exists(corpus_dir / "truth.jsonl")) {
    truth = data::load_truth(corpus_dir / "truth.jsonl");
    inputs.emplace_back("truth.jsonl", file_digest(corpus_dir / "truth.jsonl"));
  }
  Manifest m("weaklabel", config, json{{"fit", fit}}, inputs);

  weak::LabelingConfig lc{weak::Lexicon::load(corpus_dir / "lexicon.tsv"),
                          weak::SeedInterestSets::load(corpus_dir / "seeds.jsonl", corpus), config.thresholds,
                          config.cluster_cut};
  WeaklabelReport report;
  if (fit) {
    const auto stats = weak::compute_statistics(corpus, lc);
    const auto split = data::split_clean(clean_items(corpus), config.split_seed);
    for (const auto& [src, f] : weak::fit_thresholds(stats, split.train)) {
      lc.thresholds.set(src, f.tau);
      report.fitted.push_back({src, f});
    }
  }
  report.labeling = weak::apply_labeling(corpus, lc, truth ? &*truth : nullptr);

  for (const auto& set : report.labeling.sets) {
    weak::save_weak_set(set, out / weak_file(set.source), m.hash());
    m.artifact(out / weak_file(set.source));
  }
  {
    io::CsvWriter q(out / "quality.csv", "mwss.quality", m.hash(),
                    {"source", "scope", "threshold", "accuracy", "f1", "coverage", "evaluated"});
    for (const auto& row : report.labeling.quality) {
      q.row({std::string(weak::to_string(row.source)), row.scope, io::real(lc.thresholds.of(row.source)),
             io::real(row.accuracy), io::real(row.f1), io::real(row.coverage), std::to_string(row.evaluated)});
    }
    m.artifact(out / "quality.csv");
  }
  if (fit) {
    io::CsvWriter t(out / "thresholds.csv", "mwss.thresholds", m.hash(), {"source", "tau", "accuracy", "degenerate"});
    for (const auto& r : report.fitted) {
      t.row({std::string(weak::to_string(r.source)), io::real(r.fit.tau), io::real(r.fit.accuracy),
             r.fit.degenerate ? "true" : "false"});
    }
    m.artifact(out / "thresholds.csv");
  }
  m.write(out);
  return report;
}

RunOutcome cmd_train(const RunConfig& config, const fs::path& corpus_dir, const fs::path& weak_dir, Method method,
                     const fs::path& out) {
  const auto exp = load_experiment(config, corpus_dir, weak_dir);
  Manifest m("train", config, json{{"mode", std::string(to_string(method))}}, exp.inputs);
  auto r = run_method(exp, method, config.train.seed);

  Checkpoint ck;
  ck.manifest = m.hash();
  ck.method = std::string(to_string(method));
  ck.seed = config.train.seed;
  ck.config = config;
  ck.spec = r.spec;
  ck.theta = r.result.theta;
  ck.alpha = r.result.alpha;
  save_checkpoint(ck, out / "checkpoint.bin");
  m.artifact(out / "checkpoint.bin");

  const auto wcols = weight_columns(config.sources);
  {
    std::vector<std::string> cols{"step", "train_loss", "val_loss", "val_accuracy"};
    if (method == Method::mwss) cols.insert(cols.end(), wcols.begin(), wcols.end());
    io::CsvWriter h(out / "history.csv", "mwss.history", m.hash(), cols);
    for (const auto& row : r.result.history) {
      std::vector<std::string> cells{std::to_string(row.step), row.train_loss ? io::real(*row.train_loss) : "",
                                     io::real(row.val_loss), io::real(row.val_accuracy)};
      if (method == Method::mwss) {
        for (double w : row.mean_weight) cells.push_back(io::real(w));
      }
      h.row(cells);
    }
    m.artifact(out / "history.csv");
  }
  {
    std::vector<std::string> cols{"method", "seed", "clean_ratio", "clean_used", "steps", "best_step", "accuracy",
                                  "precision", "recall", "f1", "tp", "fp", "tn", "fn"};
    cols.insert(cols.end(), wcols.begin(), wcols.end());
    io::CsvWriter w(out / "metrics.csv", "mwss.metrics", m.hash(), cols);
    std::vector<std::string> cells{std::string(to_string(method)), std::to_string(r.seed), io::real(r.ratio),
                                   std::to_string(r.clean_used), std::to_string(r.result.steps),
                                   std::to_string(r.result.best_step), io::real(r.test.accuracy),
                                   io::real(r.test.precision), io::real(r.test.recall), io::real(r.test.f1),
                                   std::to_string(r.test.tp), std::to_string(r.test.fp), std::to_string(r.test.tn),
                                   std::to_string(r.test.fn)};
    for (std::size_t k = 0; k < wcols.size(); ++k) {
      cells.push_back(k < r.mean_weight.size() ? io::real(r.mean_weight[k]) : "");
    }
    w.row(cells);
    m.artifact(out / "metrics.csv");
  }
  m.write(out);
  return r;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const fs::path& corpus_dir, const fs::path& weak_dir,
                                const std::vector<double>& ratios, const std::vector<std::uint64_t>& seeds,
                                const std::vector<Method>& methods, std::size_t jobs, const fs::path& out) {
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("sweep ratios must lie in (0, 1), got " + io::real(r));
  }
  if (ratios.empty() || seeds.empty() || methods.empty()) {
    throw ValidationError("sweep needs at least one ratio, seed and method");
  }
  const auto exp = load_experiment(config, corpus_dir, weak_dir);
  json args{{"ratios", ratios}, {"seeds", seeds}};
  for (auto mth : methods) args["methods"].push_back(std::string(to_string(mth)));
  Manifest m("sweep", config, args, exp.inputs);

  std::vector<SweepRow> rows;
  for (auto mth : std::set<Method>(methods.begin(), methods.end())) {
    for (double r : std::set<double>(ratios.begin(), ratios.end())) {
      for (auto s : std::set<std::uint64_t>(seeds.begin(), seeds.end())) {
        SweepRow row;
        row.method = mth;
        row.ratio = r;
        row.seed = s;
        rows.push_back(row);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      auto& row = rows[i];
      try {
        const auto r = run_method(exp, row.method, row.seed, row.ratio);
        row.accuracy = r.test.accuracy;
        row.f1 = r.test.f1;
        row.clean_used = r.clean_used;
        row.mean_weight = r.mean_weight;
      } catch (const ValidationError& e) {
        row.skipped = true;
        row.reason = e.what();
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, rows.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  {
    std::vector<std::string> cols{"method", "ratio", "seed", "status", "clean_used", "accuracy", "f1"};
    const auto wcols = weight_columns(config.sources);
    cols.insert(cols.end(), wcols.begin(), wcols.end());
    cols.push_back("reason");
    io::CsvWriter w(out / "sweep.csv", "mwss.sweep", m.hash(), cols);
    for (const auto& r : rows) {
      std::vector<std::string> cells{std::string(to_string(r.method)), io::real(r.ratio), std::to_string(r.seed),
                                     r.skipped ? "skipped" : "ok", std::to_string(r.clean_used),
                                     r.skipped ? "" : io::real(r.accuracy), r.skipped ? "" : io::real(r.f1)};
      for (std::size_t k = 0; k < wcols.size(); ++k) {
        cells.push_back(k < r.mean_weight.size() ? io::real(r.mean_weight[k]) : "");
      }
      cells.push_back(r.reason);
      w.row(cells);
    }
    m.artifact(out / "sweep.csv");
  }
  {
    io::CsvWriter w(out / "sweep_mean.csv", "mwss.sweep_mean", m.hash(),
                    {"method", "ratio", "runs", "mean_accuracy", "mean_f1"});
    std::map<std::pair<Method, double>, std::vector<const SweepRow*>> groups;
    for (const auto& r : rows) {
      if (!r.skipped) groups[{r.method, r.ratio}].push_back(&r);
    }
    for (const auto& [key, g] : groups) {
      double acc = 0.0, f1 = 0.0;
      for (const auto* r : g) {
        acc += r->accuracy;
        f1 += r->f1;
      }
      const auto n = static_cast<double>(g.size());
      w.row({std::string(to_string(key.first)), io::real(key.second), std::to_string(g.size()), io::real(acc / n),
             io::real(f1 / n)});
    }
    m.artifact(out / "sweep_mean.csv");
  }
  m.write(out);
  return rows;
}

std::vector<WeightHistogram> cmd_weights(const fs::path& checkpoint, const fs::path& corpus_dir,
                                         const fs::path& weak_dir, const RunConfig* config, const fs::path& out) {
  const auto ck = load_checkpoint(checkpoint);
  if (config && config_hash(*config) != config_hash(ck.config)) {
    throw ValidationError("config hash " + config_hash(*config) + " does not match the checkpoint's " +
                          config_hash(ck.config));
  }
  if (ck.spec.num_sources != ck.config.sources.size()) {
    throw ValidationError("checkpoint trained on " + std::to_string(ck.spec.num_sources) +
                          " merged source(s); per-source weights need one head per configured source");
  }
  const auto exp = load_experiment(ck.config, corpus_dir, weak_dir);
  auto inputs = exp.inputs;
  inputs.emplace_back("checkpoint.bin", file_digest(checkpoint));
  Manifest m("weights", ck.config, json::object(), inputs);

  auto histogram = [&](std::string name, const std::vector<model::Example>& set) {
    WeightHistogram h{std::move(name), std::vector<std::size_t>(kWeightBins, 0), set.size(), 0.0};
    double sum = 0.0;
    for (const auto& ex : set) {
      const auto enc = text::encode(ck.spec.encoder, ck.theta, ex.tokens);
      const double w = model::lwn_weight(ck.spec, ck.alpha, enc.h, ex.label);
      sum += w;
      const auto bin = std::min(kWeightBins - 1, static_cast<std::size_t>(std::floor(w * kWeightBins)));
      ++h.bins[bin];
    }
    h.mean = set.empty() ? 0.0 : sum / static_cast<double>(set.size());
    return h;
  };
  std::vector<WeightHistogram> hist;
  for (std::size_t k = 0; k < exp.weak.size(); ++k) {
    hist.push_back(histogram(std::string(weak::to_string(ck.config.sources[k])), exp.weak[k]));
  }
  hist.push_back(histogram("clean", exp.train_pool));

  {
    io::CsvWriter w(out / "weights.csv", "mwss.weights", m.hash(), {"source", "bin", "lower", "upper", "count"});
    for (const auto& h : hist) {
      for (std::size_t b = 0; b < kWeightBins; ++b) {
        w.row({h.source, std::to_string(b), io::real(static_cast<double>(b) / kWeightBins),
               io::real(static_cast<double>(b + 1) / kWeightBins), std::to_string(h.bins[b])});
      }
    }
    m.artifact(out / "weights.csv");
  }
  {
    io::CsvWriter w(out / "weights_summary.csv", "mwss.weights_summary", m.hash(), {"source", "count", "mean"});
    for (const auto& h : hist) w.row({h.source, std::to_string(h.count), io::real(h.mean)});
    m.artifact(out / "weights_summary.csv");
  }
  m.write(out);
  return hist;
}

}  // namespace mwss::harness
