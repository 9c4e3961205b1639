#include "commands.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "deephate/checkpoint.h"
#include "deephate/corpus.h"
#include "deephate/embeddings.h"
#include "deephate/error.h"
#include "deephate/evalx.h"
#include "deephate/hashing.h"
#include "deephate/log.h"
#include "deephate/miniature.h"
#include "deephate/model.h"
#include "deephate/rng.h"
#include "deephate/topics.h"
#include "deephate/training.h"
#include "deephate/version.h"

namespace deephate::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

Context::Context(std::string command, const GlobalOptions& options, bool config_required)
    : command_(std::move(command)), options_(options), started_at_(utc_now()) {
  if (options.config_path.empty()) {
    if (config_required) throw Error("--config is required for '" + command_ + "'");
  } else {
    config_ = parse_config(options.config_path);
    has_config_ = true;
    record_input(options.config_path);
  }
  if (options.seed) {
    config_.seed = *options.seed;
    config_.train.seed = *options.seed;
    config_.lda.seed = *options.seed;
  }
  if (options.threads) {
    if (*options.threads < 1) throw Error("--threads must be >= 1");
    config_.threads = *options.threads;
    config_.train.threads = *options.threads;
  }
  if (!options.out_dir.empty()) config_.out_dir = options.out_dir;
  dir_ = has_config_ ? config_.out_dir / config_.dataset_name() : config_.out_dir;
  fs::create_directories(dir_);
}

fs::path Context::require(const std::string& name, const std::string& producer) {
  const fs::path p = artifact(name);
  if (!fs::exists(p)) {
    throw Error("missing " + p.string() + "; run 'deephate " + producer + "' first");
  }
  record_input(p);
  return p;
}

void Context::record_input(const fs::path& path) { inputs_[path.string()] = sha256_file(path); }
void Context::record_output(const fs::path& path) { outputs_[path.string()] = sha256_file(path); }

void Context::finish() {
  nlohmann::json m;
  m["command"] = command_;
  m["deephate_version"] = kVersion;
#if defined(__clang__)
  m["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  m["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  m["seed"] = config_.seed;
  m["config"] = has_config_ ? serialize_config(config_) : "";
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  m["details"] = extra_;
  m["started_at"] = started_at_;
  m["finished_at"] = utc_now();
  fs::create_directories(dir_ / "manifests");
  std::ofstream out(dir_ / "manifests" / (command_ + ".json"));
  out << m.dump(2) << '\n';
}

namespace {

constexpr const char* kCorpusFile = "corpus.tsv";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kSentimentFile = "sentiment.tsv";
constexpr const char* kSentimentEmbedFile = "sentiment_embedding.bin";
constexpr const char* kTopicsFile = "topics.bin";
constexpr const char* kModelFile = "model.bin";

ClassScheme scheme_of(const RunConfig& c) {
  const std::string name = c.dataset_name();
  if (name == "combined") return ClassScheme({"normal", "inappropriate"});
  return c.dataset(name).format.scheme;
}

Corpus load_one(Context& ctx, const DatasetConfig& d) {
  Corpus corpus = load_dataset(d.path, d.format);
  corpus.name = d.name;
  ctx.record_input(d.path);
  if (d.dedup_retweets) {
    const std::size_t before = corpus.size();
    corpus = dedup_retweets(corpus);
    log::info(d.name + ": dropped " + std::to_string(before - corpus.size()) +
              " retweets and duplicates");
  }
  return corpus;
}

Corpus load_raw(Context& ctx) {
  const RunConfig& c = ctx.config();
  if (c.dataset_name() != "combined") return load_one(ctx, c.dataset(c.dataset_name()));
  std::vector<Corpus> parts;
  for (const auto& d : c.datasets) parts.push_back(load_one(ctx, d));
  return build_combined(parts, c.combined->mapping);
}

Corpus load_corpus(Context& ctx) {
  Corpus corpus = load_tokenized(ctx.require(kCorpusFile, "preprocess"), scheme_of(ctx.config()),
                                 ctx.config().dataset_name());
  corpus.vocab = load_vocab(ctx.require(kVocabFile, "preprocess"));
  return corpus;
}

void attach_sentiment(Context& ctx, Corpus& corpus) {
  const auto labels = load_sentiment_labels(ctx.require(kSentimentFile, "sentiment-label"));
  for (auto& p : corpus.posts) {
    auto it = labels.find(p.id);
    if (it == labels.end()) {
      throw Error("post " + p.id + " has no sentiment label; rerun 'deephate sentiment-label'");
    }
    p.sentiment = it->second;
  }
}

SplitPlan plan_for(const RunConfig& c, const Corpus& corpus) {
  return make_folds(corpus, c.folds, c.seed);
}

EmbeddingTable pretrained_table(const RunConfig& c, const Vocabulary& vocab, std::size_t branch) {
  const std::optional<fs::path>* paths[3] = {&c.glove, &c.word2vec_wiki, &c.paragram};
  const EmbeddingSource sources[3] = {EmbeddingSource::kGlove, EmbeddingSource::kWord2VecWiki,
                                      EmbeddingSource::kParagram};
  const auto& path = *paths[branch];
  if (!path) {
    log::warn(std::string("no ") + std::string(source_name(sources[branch])) +
              " file configured; using a random frozen table");
    return random_table(vocab, c.encoder.embed_dim, sources[branch], c.seed, true);
  }
  EmbeddingTable t = load_pretrained(*path, vocab, sources[branch], c.encoder.embed_dim, c.seed);
  log::info(std::string(source_name(sources[branch])) + " coverage " + std::to_string(t.coverage));
  return t;
}

ModelConfig model_config(const RunConfig& c, std::size_t classes) {
  ModelConfig m;
  m.encoder = c.encoder;
  m.topics = static_cast<std::size_t>(c.topics());
  m.classes = classes;
  m.variant = c.variant;
  m.freeze_pretrained = c.freeze_pretrained;
  m.max_len = c.train.max_len;
  m.dropout_embed = c.train.dropout_embed;
  m.dropout_fc = c.train.dropout_fc;
  m.seed = c.seed;
  return m;
}

TrainConfig sentiment_train_config(const RunConfig& c) {
  TrainConfig t = c.train;
  t.epochs = c.sentiment_epochs;
  return t;
}

PipelineConfig pipeline_config(const RunConfig& c, std::size_t classes) {
  PipelineConfig p;
  p.model = model_config(c, classes);
  p.train = c.train;
  p.sentiment_train = sentiment_train_config(c);
  p.lda = c.lda;
  p.lda_filter = c.lda_filter;
  p.sparsify_threshold = c.sparsify_threshold;
  p.vocab_min_freq = c.vocab_min_freq;
  p.tables = [c](const Vocabulary& vocab, std::size_t branch) {
    return pretrained_table(c, vocab, branch);
  };
  return p;
}

void write_text(Context& ctx, const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  out.close();
  ctx.record_output(path);
}

// Writes a metrics report in the requested format and returns its path.
fs::path write_metrics(Context& ctx, const std::string& stem,
                       const std::vector<std::tuple<std::string, std::string, MetricsReport>>& rows,
                       const ClassScheme& scheme) {
  if (ctx.options().format == ReportFormat::kJson) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [config, fold, report] : rows) {
      j.push_back({{"config", config}, {"fold", fold}, {"metrics", to_json(report, &scheme)}});
    }
    const fs::path p = ctx.artifact(stem + ".json");
    write_text(ctx, p, j.dump(2) + "\n");
    return p;
  }
  std::ostringstream out;
  out << "config\tfold\tmetric\tvalue\n";
  for (const auto& [config, fold, report] : rows) write_metric_rows(out, config, fold, report, &scheme);
  const fs::path p = ctx.artifact(stem + ".tsv");
  write_text(ctx, p, out.str());
  return p;
}

void print_summary(const std::string& label, const MetricsReport& r) {
  std::cout << std::fixed << std::setprecision(4) << label << "\taccuracy " << r.accuracy
            << "\tmicro_f1 " << r.micro_f1 << "\tweighted_p " << r.weighted_precision
            << "\tweighted_r " << r.weighted_recall << "\tweighted_f1 " << r.weighted_f1 << '\n';
}

TopicModel load_topics(Context& ctx) { return load_topic_model(ctx.require(kTopicsFile, "fit-topics")); }

}  // namespace

int cmd_preprocess(Context& ctx) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_raw(ctx);
  const SplitPlan plan = plan_for(c, corpus);
  Corpus train_only;
  train_only.scheme = corpus.scheme;
  for (auto i : plan.train_indices(c.holdout_fold)) train_only.posts.push_back(corpus.posts[i]);
  const Vocabulary vocab = build_vocab(train_only, c.vocab_min_freq);

  save_tokenized(corpus, ctx.artifact(kCorpusFile));
  ctx.record_output(ctx.artifact(kCorpusFile));
  save_vocab(vocab, ctx.artifact(kVocabFile));
  ctx.record_output(ctx.artifact(kVocabFile));
  std::ostringstream folds;
  folds << "id\tfold\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    folds << corpus.posts[i].id << '\t' << plan.assignments[i] << '\n';
  }
  write_text(ctx, ctx.artifact("folds.tsv"), folds.str());
  ctx.extra()["posts"] = corpus.size();
  ctx.extra()["vocabulary"] = vocab.size();
  std::cout << corpus.size() << " posts, vocabulary " << vocab.size() << " (from "
            << train_only.size() << " training posts)\n";
  return 0;
}

int cmd_sentiment_label(Context& ctx) {
  const RunConfig& c = ctx.config();
  if (!c.lexicon && !c.sentiment_labels) {
    throw Error("sentiment-label needs [sentiment] lexicon or [sentiment] labels in the config");
  }
  Corpus corpus = load_corpus(ctx);
  SentimentLexicon lexicon;
  if (c.lexicon) {
    lexicon = SentimentLexicon::load(*c.lexicon);
    ctx.record_input(*c.lexicon);
  } else {
    lexicon.negations = SentimentLexicon::default_negations();
    lexicon.boosters = SentimentLexicon::default_boosters();
  }
  std::unordered_map<std::string, SentimentLabel> external;
  if (c.sentiment_labels) {
    external = load_sentiment_labels(*c.sentiment_labels);
    ctx.record_input(*c.sentiment_labels);
    std::size_t missing = 0;
    for (const auto& p : corpus.posts) missing += external.count(p.id) ? 0 : 1;
    if (missing && !c.lexicon) {
      log::warn(std::to_string(missing) +
                " posts lack an external label and no lexicon is configured; they become neutral");
    }
  }
  assign_sentiment(corpus, lexicon, c.sentiment_labels ? &external : nullptr);
  save_sentiment_labels(corpus, ctx.artifact(kSentimentFile));
  ctx.record_output(ctx.artifact(kSentimentFile));

  const auto dist = sentiment_distribution(corpus);
  std::ostringstream out;
  out << "polarity\tfraction\n";
  const char* names[3] = {"negative", "neutral", "positive"};
  for (int i = 0; i < 3; ++i) {
    out << names[i] << '\t' << std::setprecision(10) << dist[i] << '\n';
    std::cout << names[i] << '\t' << std::fixed << std::setprecision(4) << dist[i] << '\n';
  }
  write_text(ctx, ctx.artifact("sentiment_distribution.tsv"), out.str());
  return 0;
}

int cmd_train_sentiment_embed(Context& ctx) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  attach_sentiment(ctx, corpus);
  const SplitPlan plan = plan_for(c, corpus);
  const auto train = post_pointers(corpus, plan.train_indices(c.holdout_fold));
  TrainHistory history;
  const EmbeddingTable table = train_sentiment_embedding(
      train, *corpus.vocab, c.encoder, sentiment_train_config(c), &history,
      [](const EpochStats& s) {
        log::info("sentiment epoch " + std::to_string(s.epoch) + " loss " +
                  std::to_string(s.mean_loss) + " acc " + std::to_string(s.train_accuracy));
        return true;
      });
  save_embedding(table, *corpus.vocab, ctx.artifact(kSentimentEmbedFile));
  ctx.record_output(ctx.artifact(kSentimentEmbedFile));
  std::ostringstream out;
  out << "epoch\tmean_loss\ttrain_accuracy\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << '\t' << std::setprecision(10) << e.mean_loss << '\t' << e.train_accuracy << '\n';
  }
  write_text(ctx, ctx.artifact("sentiment_history.tsv"), out.str());
  std::cout << "sentiment embedding trained on " << train.size() << " posts, sha256 "
            << table.sha256() << '\n';
  return 0;
}

int cmd_fit_topics(Context& ctx, bool sweep) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  const SplitPlan plan = plan_for(c, corpus);
  const auto train = post_pointers(corpus, plan.train_indices(c.holdout_fold));
  const LdaCorpus lda = filter_corpus_for_lda(train, default_stopwords(), c.lda_filter);
  log::info("LDA corpus: " + std::to_string(lda.docs.size()) + " posts, " +
            std::to_string(lda.vocab.size()) + " words, " + std::to_string(lda.dropped_ids.size()) +
            " posts dropped by filtering");
  if (sweep) {
    const auto rows = sweep_topic_count(lda, c.sweep_min, c.sweep_max, c.lda);
    std::ostringstream out;
    out << "topics\tlog_likelihood\n";
    for (const auto& [k, ll] : rows) {
      out << k << '\t' << std::setprecision(12) << ll << '\n';
      std::cout << k << '\t' << std::setprecision(12) << ll << '\n';
    }
    write_text(ctx, ctx.artifact("topic_sweep.tsv"), out.str());
    return 0;
  }
  const TopicModel model = fit_lda(lda, c.lda);
  save_topic_model(model, ctx.artifact(kTopicsFile));
  ctx.record_output(ctx.artifact(kTopicsFile));
  Corpus assigned = corpus;
  const double fallback = assign_topics(assigned, model, c.sparsify_threshold);
  ctx.extra()["uniform_fallback_fraction"] = fallback;
  std::cout << "fitted " << model.topics << " topics over " << lda.docs.size()
            << " posts; uniform fallback for " << std::fixed << std::setprecision(4) << fallback
            << " of the corpus\n";
  return 0;
}

int cmd_train(Context& ctx, const std::string& baseline) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  const SplitPlan plan = plan_for(c, corpus);
  const auto train_idx = plan.train_indices(c.holdout_fold);
  const auto test_idx = plan.test_indices(c.holdout_fold);

  auto log_epoch = [](const EpochStats& s) {
    log::info("epoch " + std::to_string(s.epoch) + " loss " + std::to_string(s.mean_loss) +
              " acc " + std::to_string(s.train_accuracy));
    return true;
  };
  auto write_history = [&](const TrainHistory& h, const std::string& name) {
    std::ostringstream out;
    out << "epoch\tmean_loss\ttrain_accuracy\n";
    for (const auto& e : h.epochs) {
      out << e.epoch << '\t' << std::setprecision(10) << e.mean_loss << '\t' << e.train_accuracy << '\n';
    }
    write_text(ctx, ctx.artifact(name), out.str());
  };

  if (!baseline.empty()) {
    const auto dash = baseline.find('-');
    if (dash == std::string::npos) throw Error("--baseline expects FAMILY-UNIT such as CNN-W");
    BaselineSpec spec;
    spec.family = parse_family(baseline.substr(0, dash));
    const std::string u = baseline.substr(dash + 1);
    spec.unit = u == "W" ? InputUnit::kWord : u == "C" ? InputUnit::kChar
              : u == "B" ? InputUnit::kCharBigram : parse_unit(u);
    spec.embed_dim = c.encoder.embed_dim;
    spec.filter_widths = c.encoder.filter_widths;
    spec.filters = c.encoder.filters;
    spec.hidden = c.encoder.hidden;
    spec.max_len = spec.unit == InputUnit::kWord ? c.train.max_len : 4 * c.train.max_len;
    spec.classes = corpus.scheme.size();
    spec.dropout_embed = c.train.dropout_embed;
    spec.dropout_fc = c.train.dropout_fc;
    spec.seed = c.seed;
    const auto train = post_pointers(corpus, train_idx);
    BaselineModel<float> model(spec, build_unit_vocab(train, spec.unit, c.vocab_min_freq));
    const TrainHistory h = train_classifier(model, train, c.train, log_epoch);
    write_history(h, "history_" + spec.label() + ".tsv");
    const Evaluation e = evaluate(model, post_pointers(corpus, test_idx), c.threads);
    write_metrics(ctx, "metrics_" + spec.label(),
                  {{spec.label(), std::to_string(c.holdout_fold), e.metrics}}, corpus.scheme);
    print_summary(spec.label(), e.metrics);
    return 0;
  }

  ModelConfig mc = model_config(c, corpus.scheme.size());
  const TopicModel topics = load_topics(ctx);
  if (topics.topics != static_cast<int>(mc.topics)) {
    throw Error("topics.bin has " + std::to_string(topics.topics) + " topics but the config asks for " +
                std::to_string(mc.topics) + "; rerun 'deephate fit-topics'");
  }
  assign_topics(corpus, topics, c.sparsify_threshold);

  ModelTables tables;
  EmbeddingTable* slots[3] = {&tables.glove, &tables.word2vec, &tables.paragram};
  for (std::size_t b = 0; b < 3; ++b) *slots[b] = pretrained_table(c, *corpus.vocab, b);
  if (mc.has_sentiment()) {
    tables.sentiment = load_embedding(ctx.require(kSentimentEmbedFile, "train-sentiment-embed"),
                                      *corpus.vocab);
  }
  std::vector<std::string> before;
  for (std::size_t b = 0; b < (mc.has_sentiment() ? 4u : 3u); ++b) before.push_back(tables[b].sha256());

  DeepHate<float> model(mc, *corpus.vocab, tables);
  const TrainHistory h = train_classifier(model, post_pointers(corpus, train_idx), c.train, log_epoch);
  write_history(h, "history.tsv");

  nlohmann::json hashes = nlohmann::json::object();
  for (std::size_t b = 0; b < before.size(); ++b) {
    const std::string after = sha256_tensor(model.table(b));
    if (mc.freeze_pretrained || b == 3) {
      if (after != before[b]) throw Error("frozen table " + std::string(kBranchNames[b]) + " changed during training");
    }
    hashes[std::string(kBranchNames[b])] = after;
  }
  ctx.extra()["table_sha256"] = hashes;
  save_model(model, ctx.artifact(kModelFile), {{"holdout_fold", c.holdout_fold}});
  ctx.record_output(ctx.artifact(kModelFile));
  const auto& last = h.epochs.back();
  std::cout << "trained " << variant_name(mc.variant) << " for " << h.epochs.size()
            << " epochs; final loss " << last.mean_loss << ", train accuracy " << last.train_accuracy
            << '\n';
  return 0;
}

int cmd_eval(Context& ctx) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  const DeepHate<float> model = load_model(ctx.require(kModelFile, "train"));
  if (model.config().has_topics()) assign_topics(corpus, load_topics(ctx), c.sparsify_threshold);
  const SplitPlan plan = plan_for(c, corpus);
  const Evaluation e = evaluate(model, post_pointers(corpus, plan.test_indices(c.holdout_fold)),
                                c.threads);
  const std::string label(variant_name(model.config().variant));
  write_metrics(ctx, "metrics", {{label, std::to_string(c.holdout_fold), e.metrics}}, corpus.scheme);
  std::ostringstream cm;
  cm << "true\\predicted";
  for (const auto& n : corpus.scheme.names()) cm << '\t' << n;
  cm << '\n';
  for (std::size_t t = 0; t < corpus.scheme.size(); ++t) {
    cm << corpus.scheme.name(t);
    for (std::size_t p = 0; p < corpus.scheme.size(); ++p) cm << '\t' << e.confusion.at(t, p);
    cm << '\n';
  }
  write_text(ctx, ctx.artifact("confusion.tsv"), cm.str());
  print_summary(label, e.metrics);
  return 0;
}

int cmd_cross_validate(Context& ctx) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  attach_sentiment(ctx, corpus);
  const SplitPlan plan = plan_for(c, corpus);
  const PipelineConfig pipeline = pipeline_config(c, corpus.scheme.size());
  const CrossValidation cv = cross_validate(corpus, plan, pipeline);
  const std::string label(variant_name(c.variant));
  std::vector<std::tuple<std::string, std::string, MetricsReport>> rows;
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    rows.emplace_back(label, std::to_string(f), cv.folds[f].evaluation.metrics);
    print_summary(label + " fold " + std::to_string(f), cv.folds[f].evaluation.metrics);
  }
  rows.emplace_back(label, "mean", cv.mean);
  print_summary(label + " mean", cv.mean);
  write_metrics(ctx, "cv_metrics", rows, corpus.scheme);
  return 0;
}

int cmd_ablate(Context& ctx) {
  const RunConfig& c = ctx.config();
  Corpus corpus = load_corpus(ctx);
  attach_sentiment(ctx, corpus);
  const SplitPlan plan = plan_for(c, corpus);
  const auto rows = run_ablation(corpus, plan, pipeline_config(c, corpus.scheme.size()));

  std::ostringstream table;
  table << "config\taccuracy\tmicro_precision\tmicro_recall\tmicro_f1\tweighted_precision\t"
           "weighted_recall\tweighted_f1\n";
  std::vector<std::tuple<std::string, std::string, MetricsReport>> detail;
  for (const auto& row : rows) {
    const std::string label(variant_name(row.variant));
    const auto& m = row.mean;
    table << label << std::setprecision(10) << '\t' << m.accuracy << '\t' << m.micro_precision
          << '\t' << m.micro_recall << '\t' << m.micro_f1 << '\t' << m.weighted_precision << '\t'
          << m.weighted_recall << '\t' << m.weighted_f1 << '\n';
    for (std::size_t f = 0; f < row.folds.size(); ++f) {
      detail.emplace_back(label, std::to_string(f), row.folds[f].evaluation.metrics);
    }
    detail.emplace_back(label, "mean", m);
    print_summary(label, m);
  }
  write_text(ctx, ctx.artifact("ablation.tsv"), table.str());
  write_metrics(ctx, "ablation_metrics", detail, corpus.scheme);
  return 0;
}

int cmd_explain(Context& ctx, const std::string& post_id, const std::string& text) {
  const RunConfig& c = ctx.config();
  if (post_id.empty() == text.empty()) throw Error("explain needs exactly one of --post-id or --text");
  const DeepHate<float> model = load_model(ctx.require(kModelFile, "train"));
  Post post;
  std::string stem;
  if (!post_id.empty()) {
    Corpus corpus = load_corpus(ctx);
    auto it = std::find_if(corpus.posts.begin(), corpus.posts.end(),
                           [&](const Post& p) { return p.id == post_id; });
    if (it == corpus.posts.end()) throw Error("no post with id '" + post_id + "'");
    post = *it;
    stem = post_id;
  } else {
    post.id = "text";
    post.tokens = normalize_and_tokenize(text);
    stem = "text-" + sha256_hex({reinterpret_cast<const unsigned char*>(text.data()), text.size()}).substr(0, 12);
  }
  if (model.config().has_topics()) {
    const TopicModel topics = load_topics(ctx);
    post.topic_dist = sparsify(infer_topics(post, topics), c.sparsify_threshold);
  }
  for (auto& ch : stem) {
    if (ch == '/' || ch == '\\') ch = '_';
  }
  const SaliencyMap map = saliency(model, post);
  fs::create_directories(ctx.artifact("explain"));
  write_text(ctx, ctx.artifact("explain") / (stem + ".html"), render_saliency(map, RenderFormat::kHtml));
  write_text(ctx, ctx.artifact("explain") / (stem + ".json"), saliency_json(map).dump(2) + "\n");
  const ClassScheme scheme = scheme_of(c);
  std::cout << render_saliency(map, RenderFormat::kAnsi);
  std::cout << "predicted " << scheme.name(static_cast<std::size_t>(map.predicted)) << " ("
            << std::fixed << std::setprecision(4)
            << map.probabilities[static_cast<std::size_t>(map.predicted)] << ")\n";
  return 0;
}

int cmd_gradcheck(Context& ctx) {
  const std::uint64_t seed = ctx.config().seed;
  const Miniature mini = make_miniature(seed);
  DeepHate<float> model(mini.config, mini.vocab, mini.tables);
  DeepHate<double> dmodel = to_double(model);
  std::vector<const Post*> posts;
  for (const auto& p : mini.posts) posts.push_back(&p);
  const auto t0 = std::chrono::steady_clock::now();
  const ModelGradCheck r = gradcheck_model(dmodel, posts, true, mix_seed(seed, "gradcheck"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  constexpr double kTolerance = 1e-4;
  std::cout << std::setprecision(6) << "max_relative_error\t" << r.report.max_relative_error
            << "\nworst_array\t" << r.report.worst_parameter << '[' << r.report.worst_index << ']'
            << "\nchecked\t" << r.report.checked << "\nskipped_at_kink\t" << r.report.skipped_at_kink
            << "\nbelow_floor\t" << r.report.below_floor << "\ntrainable_arrays\t"
            << r.trainable_arrays << "\nseconds\t" << secs << '\n';
  ctx.extra()["max_relative_error"] = r.report.max_relative_error;
  ctx.extra()["checked"] = r.report.checked;
  const bool pass = r.report.max_relative_error < kTolerance;
  std::cout << (pass ? "PASS" : "FAIL") << " (tolerance " << kTolerance << ")\n";
  return pass ? 0 : 1;
}

int cmd_stats(Context& ctx) {
  Corpus corpus = load_raw(ctx);
  const auto counts = class_distribution(corpus);
  std::ostringstream out;
  out << "dataset\tclass\tcount\tfraction\n";
  std::cout << corpus.name << " (" << corpus.size() << " posts)\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double frac = static_cast<double>(counts[i]) / static_cast<double>(corpus.size());
    out << corpus.name << '\t' << corpus.scheme.name(i) << '\t' << counts[i] << '\t'
        << std::setprecision(10) << frac << '\n';
    std::cout << "  " << std::left << std::setw(16) << corpus.scheme.name(i) << std::right
              << std::setw(8) << counts[i] << "  " << std::fixed << std::setprecision(2)
              << 100.0 * frac << "%\n";
  }
  out << corpus.name << "\ttotal\t" << corpus.size() << "\t1\n";
  write_text(ctx, ctx.artifact("stats.tsv"), out.str());
  return 0;
}

}  // namespace deephate::cli
