#include "deephate/training.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "deephate/adam.h"
#include "deephate/log.h"
#include "deephate/rng.h"

namespace deephate {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("train: learning_rate must be positive");
  }
  if (batch_size == 0) throw Error("train: batch_size must be positive");
  if (epochs < 1) throw Error("train: epochs must be positive");
  if (!(dropout_embed >= 0.0 && dropout_embed < 1.0)) throw Error("train: dropout_embed must be in [0, 1)");
  if (!(dropout_fc >= 0.0 && dropout_fc < 1.0)) throw Error("train: dropout_fc must be in [0, 1)");
  if (max_len < 1) throw Error("train: max_len must be positive");
  if (threads < 1) throw Error("train: threads must be positive");
}

namespace {

template <typename T>
std::size_t argmax(const Tensor<T>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

struct ExampleResult {
  double loss = 0.0;
  bool correct = false;
};

template <typename T>
ExampleResult run_example(const Classifier<T>& model, const Post& post,
                          const ForwardOptions& options, GradSet<T>& grads, T scale) {
  Tape<T> tape;
  Var<T> logits = model.logits(tape, post, options);
  Var<T> probs = ad::softmax(logits);
  const int label = model.target(post);
  if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes()) {
    throw Error("train: target " + std::to_string(label) + " out of range for post " + post.id);
  }
  Var<T> loss = ad::cross_entropy(probs, static_cast<std::size_t>(label));
  const double value = static_cast<double>(loss.value()[0]);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "train: non-finite loss on post " << post.id << " (label " << label << ", probs";
    for (T p : probs.value().data()) msg << " " << p;
    msg << ")";
    throw Error(msg.str());
  }
  tape.backward(loss);
  tape.accumulate_into(grads, scale);
  return {value, argmax(probs.value()) == static_cast<std::size_t>(label)};
}

}  // namespace

template <typename T>
double accumulate_example(const Classifier<T>& model, const Post& post,
                          const ForwardOptions& options, GradSet<T>& grads, T scale) {
  return run_example(model, post, options, grads, scale).loss;
}

template <typename T>
TrainHistory train_classifier(Classifier<T>& model, const std::vector<const Post*>& posts,
                              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (posts.empty()) throw Error("train: no training examples");
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  AdamState<T> adam(model.params(), adam_cfg);
  GradSet<T> grads(model.params());
  TrainHistory history;

  std::vector<std::size_t> order(posts.size());
  const std::size_t threads = static_cast<std::size_t>(config.threads);
  std::vector<GradSet<T>> chunk_grads(threads, GradSet<T>(model.params()));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(config.seed, "epoch-order:" + std::to_string(epoch)));
    rng.shuffle(order.begin(), order.end());
    const std::uint64_t epoch_seed = mix_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const T scale = T(1) / static_cast<T>(end - start);
      std::vector<ExampleResult> results(end - start);
      auto work = [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
        chunk_grads[chunk].zero();
        for (std::size_t i = lo; i < hi; ++i) {
          const std::size_t idx = order[i];
          ForwardOptions opt{true, mix_seed(epoch_seed, static_cast<std::uint64_t>(idx))};
          results[i - start] = run_example(model, *posts[idx], opt, chunk_grads[chunk], scale);
        }
      };
      const std::size_t n = end - start;
      const std::size_t used = std::min(threads, n);
      if (used <= 1) {
        work(0, start, end);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < used; ++c) {
          pool.emplace_back(work, c, start + n * c / used, start + n * (c + 1) / used);
        }
        for (auto& th : pool) th.join();
      }
      grads.zero();
      for (std::size_t c = 0; c < used; ++c) grads.add(chunk_grads[c]);
      for (const auto& r : results) {
        loss_sum += r.loss;
        correct += r.correct ? 1 : 0;
      }
      adam_step(model.params(), grads, adam);
      model.after_update();
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(posts.size()),
                     static_cast<double>(correct) / static_cast<double>(posts.size())};
    history.epochs.push_back(stats);
    log::debug("epoch " + std::to_string(epoch) + " loss " + std::to_string(stats.mean_loss) +
               " acc " + std::to_string(stats.train_accuracy));
    if (on_epoch && !on_epoch(stats)) break;
  }
  return history;
}

template <typename T>
std::vector<double> predict_proba(const Classifier<T>& model, const Post& post) {
  Tape<T> tape;
  Var<T> probs = ad::softmax(model.logits(tape, post, ForwardOptions{}));
  std::vector<double> out;
  for (T p : probs.value().data()) out.push_back(static_cast<double>(p));
  return out;
}

template <typename T>
int predict(const Classifier<T>& model, const Post& post) {
  Tape<T> tape;
  Var<T> logits = model.logits(tape, post, ForwardOptions{});
  return static_cast<int>(argmax(logits.value()));
}

std::vector<const Post*> post_pointers(const Corpus& corpus) {
  std::vector<const Post*> out;
  for (const auto& p : corpus.posts) out.push_back(&p);
  return out;
}

std::vector<const Post*> post_pointers(const Corpus& corpus,
                                       const std::vector<std::size_t>& indices) {
  std::vector<const Post*> out;
  for (auto i : indices) out.push_back(&corpus.posts.at(i));
  return out;
}

#define DEEPHATE_INSTANTIATE_TRAINING(T)                                                  \
  template TrainHistory train_classifier<T>(Classifier<T>&, const std::vector<const Post*>&, \
                                            const TrainConfig&, const EpochCallback&);       \
  template double accumulate_example<T>(const Classifier<T>&, const Post&,                  \
                                        const ForwardOptions&, GradSet<T>&, T);              \
  template std::vector<double> predict_proba<T>(const Classifier<T>&, const Post&);         \
  template int predict<T>(const Classifier<T>&, const Post&);

DEEPHATE_INSTANTIATE_TRAINING(float)
DEEPHATE_INSTANTIATE_TRAINING(double)

#undef DEEPHATE_INSTANTIATE_TRAINING

}  // namespace deephate
