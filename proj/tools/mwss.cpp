// mwss: synthesize corpora, derive weak labels, train, sweep and export LWN weights.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "mwss/config.hpp"
#include "mwss/errors.hpp"
#include "mwss/harness.hpp"

namespace fs = std::filesystem;
using namespace mwss;

namespace {

fs::path default_root() {
  if (const char* env = std::getenv("MWSS_OUT_ROOT")) return env;
  return "mwss-out";
}

harness::RunConfig config_from(const std::string& path) {
  return path.empty() ? harness::parse_config("", "defaults") : harness::load_config(path);
}

void print_metrics(const harness::RunOutcome& r) {
  std::printf("%s seed=%llu clean=%zu steps=%zu best_step=%zu accuracy=%.4f f1=%.4f\n",
              std::string(harness::to_string(r.method)).c_str(), static_cast<unsigned long long>(r.seed),
              r.clean_used, r.result.steps, r.result.best_step, r.test.accuracy, r.test.f1);
  for (std::size_t k = 0; k < r.mean_weight.size(); ++k) std::printf("  mean weight source %zu: %.4f\n", k, r.mean_weight[k]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source weak social supervision for fake news detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string corpus;
  std::string weak_dir;
  std::optional<std::uint64_t> seed;

  auto common = [&](CLI::App* sub, bool needs_corpus) {
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--out", out, "output directory (default under $MWSS_OUT_ROOT)");
    sub->add_option("--seed", seed, "seed override");
    if (needs_corpus) {
      sub->add_option("--corpus", corpus, "corpus directory")->required();
      sub->add_option("--weak", weak_dir, "weak-set directory (default <corpus>/weak)");
    }
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  common(synth, false);

  bool fit = false;
  auto* weaklabel = app.add_subcommand("weaklabel", "apply the labeling functions to a corpus");
  common(weaklabel, true);
  weaklabel->add_flag("--fit", fit, "fit thresholds on the clean training split first");

  std::string mode = "mwss";
  auto* train = app.add_subcommand("train", "train one model and evaluate it on the test split");
  common(train, true);
  train->add_option("--mode", mode, "mwss, clean, weak, merged or majority");

  std::vector<double> ratios{0.02, 0.04, 0.06, 0.08, 0.1};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> methods{"mwss", "clean", "weak", "merged", "majority"};
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "train methods over clean ratios and seeds");
  common(sweep, true);
  sweep->add_option("--ratios", ratios, "clean ratios")->delimiter(',');
  sweep->add_option("--seeds", seeds, "training seeds")->delimiter(',');
  sweep->add_option("--methods", methods, "methods")->delimiter(',');
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  std::string checkpoint;
  auto* weights = app.add_subcommand("weights", "histogram the LWN weights of a checkpoint");
  common(weights, true);
  weights->add_option("--checkpoint", checkpoint, "checkpoint.bin from train")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = config_from(config_path);
    auto out_dir = [&](const char* name) { return out.empty() ? default_root() / name : fs::path(out); };
    const fs::path wdir = weak_dir.empty() ? fs::path(corpus) / "weak" : fs::path(weak_dir);

    if (*synth) {
      if (seed) cfg.synth.seed = *seed;
      const auto dir = out_dir("corpus");
      harness::cmd_synth(cfg, dir);
      std::printf("corpus written to %s\n", dir.string().c_str());
    } else if (*weaklabel) {
      if (seed) cfg.split_seed = *seed;
      const auto dir = out.empty() ? wdir : fs::path(out);
      const auto rep = harness::cmd_weaklabel(cfg, corpus, dir, fit);
      for (const auto& f : rep.fitted) {
        std::printf("fitted %s: tau=%.3f accuracy=%.4f%s\n", std::string(weak::to_string(f.source)).c_str(), f.fit.tau,
                    f.fit.accuracy, f.fit.degenerate ? " (degenerate)" : "");
      }
      for (const auto& q : rep.labeling.quality) {
        std::printf("%-11s %-5s accuracy=%.4f f1=%.4f coverage=%.4f n=%zu\n",
                    std::string(weak::to_string(q.source)).c_str(), q.scope.c_str(), q.accuracy, q.f1, q.coverage,
                    q.evaluated);
      }
      if (rep.labeling.news_without_engagements > 0) {
        std::fprintf(stderr, "warning: %zu news without engagements (all sources abstain)\n",
                     rep.labeling.news_without_engagements);
      }
    } else if (*train) {
      if (seed) cfg.train.seed = *seed;
      print_metrics(harness::cmd_train(cfg, corpus, wdir, harness::parse_method(mode), out_dir("train")));
    } else if (*sweep) {
      std::vector<harness::Method> ms;
      for (const auto& m : methods) ms.push_back(harness::parse_method(m));
      const auto rows = harness::cmd_sweep(cfg, corpus, wdir, ratios, seeds, ms, jobs, out_dir("sweep"));
      for (const auto& r : rows) {
        if (r.skipped) {
          std::printf("%-8s r=%.3f seed=%llu skipped: %s\n", std::string(harness::to_string(r.method)).c_str(), r.ratio,
                      static_cast<unsigned long long>(r.seed), r.reason.c_str());
        } else {
          std::printf("%-8s r=%.3f seed=%llu accuracy=%.4f f1=%.4f\n", std::string(harness::to_string(r.method)).c_str(),
                      r.ratio, static_cast<unsigned long long>(r.seed), r.accuracy, r.f1);
        }
      }
    } else if (*weights) {
      const auto hist = harness::cmd_weights(checkpoint, corpus, wdir, config_path.empty() ? nullptr : &cfg,
                                             out_dir("weights"));
      for (const auto& h : hist) std::printf("%-11s n=%zu mean=%.4f\n", h.source.c_str(), h.count, h.mean);
    }
  } catch (const LeakGuardError& e) {
    std::fprintf(stderr, "leak guard: %s\n", e.what());
    return 4;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
