#include "deephate/evalx.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "deephate/error.h"
#include "deephate/log.h"

namespace deephate {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {}

ConfusionMatrix ConfusionMatrix::from_labels(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred, std::size_t classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error("confusion matrix: " + std::to_string(y_true.size()) + " labels but " +
                std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) cm.add(y_true[i], y_pred[i]);
  return cm;
}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto n = static_cast<int>(classes_);
  if (truth < 0 || truth >= n || predicted < 0 || predicted >= n) {
    throw Error("confusion matrix: class index out of range (" + std::to_string(truth) + ", " +
                std::to_string(predicted) + ") for " + std::to_string(classes_) + " classes");
  }
  ++counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(predicted)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t C = cm.classes();
  const std::size_t total = cm.total();
  if (C == 0 || total == 0) throw Error("metrics: empty confusion matrix");
  MetricsReport r;
  r.per_class.resize(C);
  double tp_sum = 0.0, fp_sum = 0.0, fn_sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    double tp = static_cast<double>(cm.at(c, c)), row = 0.0, col = 0.0;
    for (std::size_t o = 0; o < C; ++o) {
      row += static_cast<double>(cm.at(c, o));
      col += static_cast<double>(cm.at(o, c));
    }
    ClassMetrics& m = r.per_class[c];
    m.precision = ratio(tp, col);
    m.recall = ratio(tp, row);
    m.f1 = harmonic(m.precision, m.recall);
    m.support = row;
    tp_sum += tp;
    fp_sum += col - tp;
    fn_sum += row - tp;
    const double w = row / static_cast<double>(total);
    r.weighted_precision += w * m.precision;
    r.weighted_recall += w * m.recall;
    r.weighted_f1 += w * m.f1;
  }
  r.accuracy = tp_sum / static_cast<double>(total);
  r.micro_precision = ratio(tp_sum, tp_sum + fp_sum);
  r.micro_recall = ratio(tp_sum, tp_sum + fn_sum);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  return r;
}

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw Error("mean_report: no reports");
  MetricsReport m;
  const std::size_t C = reports.front().per_class.size();
  m.per_class.resize(C);
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    if (r.per_class.size() != C) throw Error("mean_report: reports disagree on the class count");
    m.accuracy += r.accuracy / n;
    m.micro_precision += r.micro_precision / n;
    m.micro_recall += r.micro_recall / n;
    m.micro_f1 += r.micro_f1 / n;
    m.weighted_precision += r.weighted_precision / n;
    m.weighted_recall += r.weighted_recall / n;
    m.weighted_f1 += r.weighted_f1 / n;
    for (std::size_t c = 0; c < C; ++c) {
      m.per_class[c].precision += r.per_class[c].precision / n;
      m.per_class[c].recall += r.per_class[c].recall / n;
      m.per_class[c].f1 += r.per_class[c].f1 / n;
      m.per_class[c].support += r.per_class[c].support / n;
    }
  }
  // Averaging n copies of one value can drift in the last bit.
  if (std::all_of(reports.begin(), reports.end(),
                  [&](const MetricsReport& r) { return r == reports.front(); })) {
    return reports.front();
  }
  return m;
}

template <typename T>
Evaluation evaluate(const Classifier<T>& model, const std::vector<const Post*>& posts,
                    int threads) {
  std::vector<int> predictions(posts.size());
  const std::size_t n = posts.size();
  const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) predictions[i] = predict(model, *posts[i]);
  };
  if (used <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t c = 0; c < used; ++c) pool.emplace_back(work, n * c / used, n * (c + 1) / used);
    for (auto& th : pool) th.join();
  }
  Evaluation e{ConfusionMatrix(model.num_classes()), {}, std::move(predictions)};
  for (std::size_t i = 0; i < n; ++i) e.confusion.add(posts[i]->label_index, e.predictions[i]);
  e.metrics = metrics_from_confusion(e.confusion);
  return e;
}

PreparedSplit prepare_split(const Corpus& corpus, std::vector<std::size_t> train,
                            std::vector<std::size_t> test, const PipelineConfig& config,
                            bool need_sentiment) {
  if (train.empty()) throw Error("prepare_split: empty training split");
  if (!config.tables) throw Error("prepare_split: no embedding table provider configured");
  PreparedSplit s;
  s.corpus = corpus;
  s.train = std::move(train);
  s.test = std::move(test);

  Corpus train_only;
  train_only.scheme = corpus.scheme;
  for (auto i : s.train) train_only.posts.push_back(corpus.posts.at(i));
  s.vocab = build_vocab(train_only, config.vocab_min_freq);
  s.corpus.vocab = s.vocab;

  const auto train_posts = post_pointers(s.corpus, s.train);
  const LdaCorpus lda_corpus = filter_corpus_for_lda(train_posts, config.stopwords, config.lda_filter);
  s.topics = fit_lda(lda_corpus, config.lda);
  s.topic_fallback = assign_topics(s.corpus, s.topics, config.sparsify_threshold);

  EmbeddingTable* slots[3] = {&s.tables.glove, &s.tables.word2vec, &s.tables.paragram};
  for (std::size_t b = 0; b < 3; ++b) *slots[b] = config.tables(s.vocab, b);
  if (need_sentiment) {
    s.tables.sentiment = train_sentiment_embedding(train_posts, s.vocab, config.model.encoder,
                                                   config.sentiment_train);
  }
  return s;
}

TrainedRun run_variant(const PreparedSplit& split, const PipelineConfig& config, Variant variant,
                       bool zero_sentiment, bool zero_topic) {
  ModelConfig mc = config.model;
  mc.variant = variant;
  mc.zero_sentiment = zero_sentiment;
  mc.zero_topic = zero_topic;
  mc.classes = split.corpus.scheme.size();
  mc.topics = static_cast<std::size_t>(split.topics.topics);
  mc.max_len = config.train.max_len;
  mc.dropout_embed = config.train.dropout_embed;
  mc.dropout_fc = config.train.dropout_fc;
  DeepHate<float> model(mc, split.vocab, split.tables);
  TrainedRun run;
  run.history = train_classifier(model, post_pointers(split.corpus, split.train), config.train);
  run.evaluation = evaluate(model, post_pointers(split.corpus, split.test), config.train.threads);
  return run;
}

CrossValidation cross_validate(const Corpus& corpus, const SplitPlan& plan,
                               const PipelineConfig& config) {
  CrossValidation cv;
  std::vector<MetricsReport> reports;
  for (int fold = 0; fold < plan.fold_count; ++fold) {
    log::info("cross-validation fold " + std::to_string(fold + 1) + "/" +
              std::to_string(plan.fold_count));
    const PreparedSplit split = prepare_split(corpus, plan.train_indices(fold),
                                              plan.test_indices(fold), config,
                                              config.model.has_sentiment());
    cv.folds.push_back(run_variant(split, config, config.model.variant));
    reports.push_back(cv.folds.back().evaluation.metrics);
  }
  cv.mean = mean_report(reports);
  return cv;
}

std::vector<AblationRow> run_ablation(const Corpus& corpus, const SplitPlan& plan,
                                      const PipelineConfig& config) {
  std::vector<AblationRow> rows;
  for (Variant v : kAllVariants) rows.push_back({v, {}, {}});
  for (int fold = 0; fold < plan.fold_count; ++fold) {
    log::info("ablation fold " + std::to_string(fold + 1) + "/" + std::to_string(plan.fold_count));
    const PreparedSplit split =
        prepare_split(corpus, plan.train_indices(fold), plan.test_indices(fold), config);
    for (auto& row : rows) row.folds.push_back(run_variant(split, config, row.variant));
  }
  for (auto& row : rows) {
    std::vector<MetricsReport> reports;
    for (const auto& f : row.folds) reports.push_back(f.evaluation.metrics);
    row.mean = mean_report(reports);
  }
  return rows;
}

namespace {

template <typename T>
std::vector<double> probabilities_of(const Tensor<T>& logits) {
  double mx = -INFINITY;
  for (T v : logits.data()) mx = std::max(mx, static_cast<double>(v));
  std::vector<double> p;
  double z = 0.0;
  for (T v : logits.data()) {
    p.push_back(std::exp(static_cast<double>(v) - mx));
    z += p.back();
  }
  for (auto& x : p) x /= z;
  return p;
}

template <typename T>
SaliencyMap saliency_skeleton(const DeepHate<T>& model, const Post& post,
                              const Tensor<T>& logits, const std::vector<int>& ids) {
  SaliencyMap m;
  const auto probs = probabilities_of(logits);
  m.predicted = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  m.probabilities = probs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == Vocabulary::kPad) continue;
    m.tokens.push_back(i < post.tokens.size() ? post.tokens[i] : model.vocab().token(ids[i]));
  }
  return m;
}

}  // namespace

template <typename T>
SaliencyMap saliency(const DeepHate<T>& model, const Post& post) {
  Tape<T> tape;
  const ForwardTrace<T> tr = model.trace(tape, post, ForwardOptions{}, true);
  SaliencyMap m = saliency_skeleton(model, post, tr.logits.value(), tr.ids);
  tape.backward(ad::element(tr.logits, static_cast<std::size_t>(m.predicted)));
  const std::size_t d = model.config().encoder.embed_dim;
  for (std::size_t i = 0; i < tr.ids.size(); ++i) {
    if (tr.ids[i] == Vocabulary::kPad) continue;
    std::array<double, 3> per{};
    for (std::size_t b = 0; b < 3; ++b) {
      const Tensor<T>* g = tape.grad(tr.semantic_inputs[b]);
      if (!g) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += std::abs(static_cast<double>((*g)(i, j)));
      per[b] = s / static_cast<double>(d);
    }
    m.branch_scores.push_back(per);
    m.scores.push_back(per[0] + per[1] + per[2]);
  }
  return m;
}

template <typename T>
SaliencyMap finite_difference_saliency(const DeepHate<T>& model, const Post& post,
                                       double epsilon) {
  std::array<Tensor<T>, 4> inputs = model.lookup(post);
  const auto ids = encode_post(post, model.vocab(), model.config().max_len);
  auto eval_logits = [&]() {
    Tape<T> tape;
    std::array<Var<T>, 4> vars;
    const std::size_t branches = model.config().has_sentiment() ? 4 : 3;
    for (std::size_t b = 0; b < branches; ++b) vars[b] = tape.constant(inputs[b]);
    return model.logits_from_inputs(tape, vars, post, ForwardOptions{}).value();
  };
  SaliencyMap m = saliency_skeleton(model, post, eval_logits(), ids);
  const auto c = static_cast<std::size_t>(m.predicted);
  const std::size_t d = model.config().encoder.embed_dim;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == Vocabulary::kPad) continue;
    std::array<double, 3> per{};
    for (std::size_t b = 0; b < 3; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        T& x = inputs[b](i, j);
        const T saved = x;
        x = saved + static_cast<T>(epsilon);
        const double up = static_cast<double>(eval_logits()[c]);
        x = saved - static_cast<T>(epsilon);
        const double down = static_cast<double>(eval_logits()[c]);
        x = saved;
        s += std::abs((up - down) / (2.0 * epsilon));
      }
      per[b] = s / static_cast<double>(d);
    }
    m.branch_scores.push_back(per);
    m.scores.push_back(per[0] + per[1] + per[2]);
  }
  return m;
}

namespace {

std::vector<double> intensities(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  std::vector<double> out;
  for (double s : scores) out.push_back(*hi > *lo ? (s - *lo) / (*hi - *lo) : 1.0);
  return out;
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_saliency(const SaliencyMap& map, RenderFormat format) {
  const auto level = intensities(map.scores);
  std::ostringstream out;
  if (format == RenderFormat::kAnsi) {
    for (std::size_t i = 0; i < map.tokens.size(); ++i) {
      // 6x6x6 cube: red fixed at 5, green and blue fade from 5 (white) to 0.
      const int fade = 5 - static_cast<int>(std::lround(5.0 * level[i]));
      const int color = 16 + 36 * 5 + 6 * fade + fade;
      if (i) out << ' ';
      out << "\x1b[48;5;" << color << "m\x1b[38;5;16m" << map.tokens[i] << "\x1b[0m";
    }
    out << '\n';
    return out.str();
  }
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>saliency</title>\n"
      << "<style>body{font-family:sans-serif}span.t{padding:2px 3px;margin:1px;"
         "border-radius:3px;display:inline-block}</style>\n"
      << "</head>\n<body>\n<p class=\"post\">";
  for (std::size_t i = 0; i < map.tokens.size(); ++i) {
    const int gb = static_cast<int>(std::lround(255.0 * (1.0 - level[i])));
    out << "<span class=\"t\" style=\"background-color:rgb(255," << gb << ',' << gb
        << ")\" title=\"" << std::setprecision(6) << map.scores[i] << "\">"
        << html_escape(map.tokens[i]) << "</span>";
    if (i + 1 < map.tokens.size()) out << ' ';
  }
  out << "</p>\n<p class=\"prediction\">predicted class " << map.predicted << "</p>\n"
      << "</body>\n</html>\n";
  return out.str();
}

nlohmann::json saliency_json(const SaliencyMap& map) {
  nlohmann::json tokens = nlohmann::json::array();
  for (std::size_t i = 0; i < map.tokens.size(); ++i) {
    tokens.push_back({{"token", map.tokens[i]},
                      {"score", map.scores[i]},
                      {"branch_scores", map.branch_scores[i]}});
  }
  return {{"predicted", map.predicted}, {"probabilities", map.probabilities}, {"tokens", tokens}};
}

std::array<double, 3> sentiment_distribution(const Corpus& corpus) {
  if (corpus.posts.empty()) throw Error("sentiment distribution: empty corpus");
  std::array<double, 3> counts{};
  for (const auto& p : corpus.posts) {
    if (!p.sentiment) throw Error("sentiment distribution: post " + p.id + " has no sentiment label");
    counts[static_cast<std::size_t>(*p.sentiment)] += 1.0;
  }
  for (auto& c : counts) c /= static_cast<double>(corpus.posts.size());
  return counts;
}

namespace {

std::vector<std::pair<std::string, double>> flatten(const MetricsReport& r,
                                                    const ClassScheme* scheme) {
  std::vector<std::pair<std::string, double>> rows{
      {"accuracy", r.accuracy},
      {"micro_precision", r.micro_precision},
      {"micro_recall", r.micro_recall},
      {"micro_f1", r.micro_f1},
      {"weighted_precision", r.weighted_precision},
      {"weighted_recall", r.weighted_recall},
      {"weighted_f1", r.weighted_f1}};
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const std::string name = scheme && c < scheme->size() ? scheme->name(c) : std::to_string(c);
    rows.emplace_back("class." + name + ".precision", r.per_class[c].precision);
    rows.emplace_back("class." + name + ".recall", r.per_class[c].recall);
    rows.emplace_back("class." + name + ".f1", r.per_class[c].f1);
    rows.emplace_back("class." + name + ".support", r.per_class[c].support);
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& report, const ClassScheme* scheme) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : flatten(report, scheme)) j[k] = v;
  return j;
}

void write_metric_rows(std::ostream& out, const std::string& config, const std::string& fold,
                       const MetricsReport& report, const ClassScheme* scheme) {
  for (const auto& [k, v] : flatten(report, scheme)) {
    out << config << '\t' << fold << '\t' << k << '\t' << std::setprecision(10) << v << '\n';
  }
}

#define DEEPHATE_INSTANTIATE_EVALX(T)                                                         \
  template Evaluation evaluate<T>(const Classifier<T>&, const std::vector<const Post*>&, int); \
  template SaliencyMap saliency<T>(const DeepHate<T>&, const Post&);                          \
  template SaliencyMap finite_difference_saliency<T>(const DeepHate<T>&, const Post&, double);

DEEPHATE_INSTANTIATE_EVALX(float)
DEEPHATE_INSTANTIATE_EVALX(double)

}  // namespace deephate
