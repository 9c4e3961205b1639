// deephate: staged command-line pipeline over on-disk artifacts.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "deephate/error.h"
#include "deephate/log.h"
#include "deephate/version.h"

namespace {

using deephate::cli::Context;
using deephate::cli::GlobalOptions;
using deephate::cli::ReportFormat;

// Flags accepted both before and after the subcommand name.
void add_global_flags(CLI::App& app, GlobalOptions& g, std::string& format) {
  app.add_option("--config", g.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Overrides [run] seed");
  app.add_option("--out", g.out_dir, "Overrides [run] out");
  app.add_option("--threads", g.threads, "Overrides [run] threads");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"tsv", "json"}));
  app.add_flag("-v,--verbose", g.verbose, "Log debug messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepHate multi-faceted hate speech classifier"};
  app.set_version_flag("--version", deephate::kVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  std::string format = "tsv";
  add_global_flags(app, g, format);

  bool sweep = false;
  std::string baseline, post_id, text;
  struct Entry {
    CLI::App* sub;
    bool config_required;
  };
  std::vector<Entry> subs;
  auto add = [&](const char* name, const char* help, bool config_required = true) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs.push_back({s, config_required});
    return s;
  };
  add("preprocess", "Tokenize, split into folds and build the vocabulary");
  add("sentiment-label", "Label every post negative/neutral/positive");
  add("train-sentiment-embed", "Learn the sentiment-specific embedding table");
  add("fit-topics", "Fit the LDA topic model")
      ->add_flag("--sweep", sweep, "Log-likelihood over the configured topic-count range");
  add("train", "Train the configured model on the holdout training split")
      ->add_option("--baseline", baseline, "Train a comparison model instead (e.g. CNN-W, LSTM-C)");
  add("eval", "Evaluate the trained model on the holdout fold");
  add("cross-validate", "Stratified k-fold training and evaluation");
  add("ablate", "Cross-validate the four model configurations");
  CLI::App* explain = add("explain", "Gradient saliency heat map for one post");
  explain->add_option("--post-id", post_id, "Post id from the corpus");
  explain->add_option("--text", text, "Raw text to classify");
  add("gradcheck", "Check gradients of a miniature model by finite differences", false);
  add("stats", "Class counts of the raw dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  g.format = format == "json" ? ReportFormat::kJson : ReportFormat::kTsv;
  if (g.verbose) deephate::log::set_min_level(deephate::log::Level::kDebug);

  try {
    for (const auto& [sub, config_required] : subs) {
      if (!sub->parsed()) continue;
      const std::string name = sub->get_name();
      // Variants of a command keep separate manifests.
      std::string label = name;
      if (name == "fit-topics" && sweep) label += "-sweep";
      if (name == "train" && !baseline.empty()) label += "-" + baseline;
      Context ctx(label, g, config_required);
      int rc = 0;
      if (name == "preprocess") rc = deephate::cli::cmd_preprocess(ctx);
      else if (name == "sentiment-label") rc = deephate::cli::cmd_sentiment_label(ctx);
      else if (name == "train-sentiment-embed") rc = deephate::cli::cmd_train_sentiment_embed(ctx);
      else if (name == "fit-topics") rc = deephate::cli::cmd_fit_topics(ctx, sweep);
      else if (name == "train") rc = deephate::cli::cmd_train(ctx, baseline);
      else if (name == "eval") rc = deephate::cli::cmd_eval(ctx);
      else if (name == "cross-validate") rc = deephate::cli::cmd_cross_validate(ctx);
      else if (name == "ablate") rc = deephate::cli::cmd_ablate(ctx);
      else if (name == "explain") rc = deephate::cli::cmd_explain(ctx, post_id, text);
      else if (name == "gradcheck") rc = deephate::cli::cmd_gradcheck(ctx);
      else if (name == "stats") rc = deephate::cli::cmd_stats(ctx);
      ctx.finish();
      return rc;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "deephate: error: " << msg << '\n';
    return 1;
  }
  return 1;
}
