#ifndef DEEPHATE_TRAINING_H_
#define DEEPHATE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "deephate/autodiff.h"
#include "deephate/corpus.h"
#include "deephate/params.h"

namespace deephate {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 64;
  int epochs = 10;
  // The published rate after the embedding layer is garbled; 0.5 is used
  // and 0.15 remains available through configuration.
  double dropout_embed = 0.5;
  double dropout_fc = 0.2;
  std::uint64_t seed = 0;
  int max_len = 50;
  // Examples of a minibatch are split into this many contiguous chunks whose
  // gradients are reduced in chunk order.
  int threads = 1;

  void validate() const;
};

struct ForwardOptions {
  bool train = false;
  std::uint64_t dropout_seed = 0;
};

// A trainable text classifier over Posts.
template <typename T>
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ParamSet<T>& params() = 0;
  virtual const ParamSet<T>& params() const = 0;
  virtual std::size_t num_classes() const = 0;

  // Unnormalized class scores, shape [C].
  virtual Var<T> logits(Tape<T>& tape, const Post& post, const ForwardOptions& options) const = 0;

  // Class index the model is trained to predict for `post`.
  virtual int target(const Post& post) const { return post.label_index; }

  // Invoked after every optimizer step.
  virtual void after_update() {}
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  bool operator==(const TrainHistory&) const = default;
};

// Returning false stops training after the current epoch.
using EpochCallback = std::function<bool(const EpochStats&)>;

// Minibatch cross-entropy minimization with Adam. Each epoch reshuffles the
// examples with a seed derived from (config.seed, epoch); dropout masks are
// derived from (config.seed, epoch, example index).
template <typename T>
TrainHistory train_classifier(Classifier<T>& model, const std::vector<const Post*>& posts,
                              const TrainConfig& config, const EpochCallback& on_epoch = {});

// Cross-entropy of one example and its gradient, accumulated into `grads`.
template <typename T>
double accumulate_example(const Classifier<T>& model, const Post& post,
                          const ForwardOptions& options, GradSet<T>& grads, T scale);

template <typename T>
std::vector<double> predict_proba(const Classifier<T>& model, const Post& post);

template <typename T>
int predict(const Classifier<T>& model, const Post& post);

std::vector<const Post*> post_pointers(const Corpus& corpus);
std::vector<const Post*> post_pointers(const Corpus& corpus,
                                       const std::vector<std::size_t>& indices);

}  // namespace deephate

#endif  // DEEPHATE_TRAINING_H_
