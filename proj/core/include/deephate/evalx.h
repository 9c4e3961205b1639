#ifndef DEEPHATE_EVALX_H_
#define DEEPHATE_EVALX_H_

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "deephate/corpus.h"
#include "deephate/embeddings.h"
#include "deephate/model.h"
#include "deephate/topics.h"
#include "deephate/training.h"

namespace deephate {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0);
  static ConfusionMatrix from_labels(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                     std::size_t classes);

  void add(int truth, int predicted);
  std::size_t classes() const { return classes_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::size_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double support = 0.0;  // a mean over folds need not be integral

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;

  bool operator==(const MetricsReport&) const = default;
};

// Ratios with a zero denominator count as 0; so does F1 when P + R = 0.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

// Field-by-field arithmetic mean.
MetricsReport mean_report(const std::vector<MetricsReport>& reports);

struct Evaluation {
  ConfusionMatrix confusion;
  MetricsReport metrics;
  std::vector<int> predictions;
};

// Argmax predictions with dropout off. Posts are split into `threads`
// contiguous chunks; results do not depend on the thread count.
template <typename T>
Evaluation evaluate(const Classifier<T>& model, const std::vector<const Post*>& posts,
                    int threads = 1);

// Supplies a vocabulary-aligned table for branch 0..2 (glove, word2vec,
// paragram).
using TableProvider = std::function<EmbeddingTable(const Vocabulary&, std::size_t branch)>;

// Everything needed to go from a labeled corpus split to a trained model.
struct PipelineConfig {
  ModelConfig model;
  TrainConfig train;
  TrainConfig sentiment_train;
  LdaConfig lda;
  LdaFilter lda_filter;
  std::unordered_set<std::string> stopwords = default_stopwords();
  double sparsify_threshold = kDefaultSparsifyThreshold;
  int vocab_min_freq = 1;
  TableProvider tables;
};

// Per-split artifacts fitted on the training part only: vocabulary, topic
// model (topic mixtures assigned to every post of the copy), sentiment
// embedding and the pretrained tables.
struct PreparedSplit {
  Corpus corpus;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  Vocabulary vocab;
  TopicModel topics;
  ModelTables tables;
  double topic_fallback = 0.0;
};

// Posts must already carry sentiment labels.
PreparedSplit prepare_split(const Corpus& corpus, std::vector<std::size_t> train,
                            std::vector<std::size_t> test, const PipelineConfig& config,
                            bool need_sentiment = true);

struct TrainedRun {
  Evaluation evaluation;
  TrainHistory history;
};

// Trains one model variant on the prepared split and evaluates on its test
// part. The zero flags feed zero vectors for that modality.
TrainedRun run_variant(const PreparedSplit& split, const PipelineConfig& config, Variant variant,
                       bool zero_sentiment = false, bool zero_topic = false);

struct CrossValidation {
  std::vector<TrainedRun> folds;
  MetricsReport mean;
};

CrossValidation cross_validate(const Corpus& corpus, const SplitPlan& plan,
                               const PipelineConfig& config);

struct AblationRow {
  Variant variant;
  std::vector<TrainedRun> folds;
  MetricsReport mean;
};

// Rows in kAllVariants order. Split artifacts are fitted once per fold and
// shared by the four variants.
std::vector<AblationRow> run_ablation(const Corpus& corpus, const SplitPlan& plan,
                                      const PipelineConfig& config);

struct SaliencyMap {
  std::vector<std::string> tokens;  // non-PAD positions only
  std::vector<double> scores;
  std::vector<std::array<double, 3>> branch_scores;  // glove, word2vec, paragram
  int predicted = 0;
  std::vector<double> probabilities;
};

// Per branch and position, the mean over embedding dimensions of
// |d logit[predicted] / d E[i, :]|; a token's score sums the three semantic
// branches. Dropout is off. PAD positions are skipped.
template <typename T>
SaliencyMap saliency(const DeepHate<T>& model, const Post& post);

// The same quantity by central differences on the encoder inputs.
template <typename T>
SaliencyMap finite_difference_saliency(const DeepHate<T>& model, const Post& post,
                                       double epsilon = 1e-5);

enum class RenderFormat { kAnsi, kHtml };

// Scores are min-max normalized per post (all-equal scores render at full
// intensity) and shown as a white-to-red background.
std::string render_saliency(const SaliencyMap& map, RenderFormat format);
nlohmann::json saliency_json(const SaliencyMap& map);

// Fractions of negative, neutral and positive posts.
std::array<double, 3> sentiment_distribution(const Corpus& corpus);

nlohmann::json to_json(const MetricsReport& report, const ClassScheme* scheme = nullptr);

// Rows "config<TAB>fold<TAB>metric<TAB>value" without a header.
void write_metric_rows(std::ostream& out, const std::string& config, const std::string& fold,
                       const MetricsReport& report, const ClassScheme* scheme = nullptr);

}  // namespace deephate

#endif  // DEEPHATE_EVALX_H_
