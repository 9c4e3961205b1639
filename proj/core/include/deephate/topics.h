#ifndef DEEPHATE_TOPICS_H_
#define DEEPHATE_TOPICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "deephate/corpus.h"
#include "deephate/tensor.h"

namespace deephate {

struct LdaConfig {
  int topics = 10;
  // Small document-topic prior skews each post toward few topics.
  double alpha = 0.1;
  double beta = 0.01;
  int iterations = 500;
  int burn_in = 200;
  int sample_lag = 10;
  std::uint64_t seed = 0;
  // Records the training log-likelihood after every sweep (costs about as
  // much as the sweep itself).
  bool record_loglik = false;

  void validate() const;
};

struct LdaDocument {
  std::string post_id;
  std::vector<int> words;  // indices into LdaCorpus::vocab
};

struct LdaCorpus {
  std::vector<std::string> vocab;  // sorted
  std::vector<LdaDocument> docs;
  std::vector<std::string> dropped_ids;

  std::size_t token_count() const;
};

struct LdaFilter {
  int min_word_posts = 5;
  int min_post_words = 3;
};

// The built-in English stopword list.
const std::unordered_set<std::string>& default_stopwords();

// Removes stopwords and tokens that are not purely ASCII letters, then
// alternately drops words seen in fewer than min_word_posts remaining posts
// and posts with fewer than min_post_words remaining tokens until neither
// step changes anything.
LdaCorpus filter_corpus_for_lda(const std::vector<const Post*>& posts,
                                const std::unordered_set<std::string>& stopwords,
                                const LdaFilter& filter = {});

struct TopicModel {
  int topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocab;
  Tensor<double> phi;    // [K, V']
  Tensor<double> theta;  // [kept posts, K]
  std::vector<std::string> kept_post_ids;
  std::vector<std::string> dropped_post_ids;
  std::vector<double> sweep_loglik;

  // Rebuilds the id and word lookups; call after filling the fields by hand.
  void index();
  std::optional<std::size_t> kept_row(const std::string& post_id) const;
  std::optional<int> word_id(const std::string& word) const;
  bool was_dropped(const std::string& post_id) const { return dropped_.count(post_id) > 0; }

 private:
  std::unordered_map<std::string, std::size_t> kept_;
  std::unordered_map<std::string, int> words_;
  std::unordered_set<std::string> dropped_;
};

// Collapsed Gibbs sampling. phi and theta average the smoothed count
// estimates of every sample_lag-th sweep from burn_in on.
TopicModel fit_lda(const LdaCorpus& corpus, const LdaConfig& config);

// Sum over tokens of log sum_k theta[d,k] phi[k,w], using each document's
// fitted mixture.
double log_likelihood(const TopicModel& model, const LdaCorpus& corpus);

// One fit per K in [k_min, k_max], seeded from (template seed, K).
std::vector<std::pair<int, double>> sweep_topic_count(const LdaCorpus& corpus, int k_min,
                                                      int k_max, const LdaConfig& config);

// Kept posts return their fitted mixture; posts dropped by filtering or with
// no in-vocabulary tokens return the uniform 1/K vector; any other post is
// folded in against the fixed topic-word distributions.
std::vector<double> infer_topics(const Post& post, const TopicModel& model);

// Zeroes entries below threshold * max and renormalizes. The largest entry
// always survives.
std::vector<double> sparsify(std::span<const double> dist, double threshold);

inline constexpr double kDefaultSparsifyThreshold = 0.1;

// Fills post.topic_dist for every post (infer_topics then sparsify) and
// returns the fraction that fell back to the uniform mixture.
double assign_topics(Corpus& corpus, const TopicModel& model,
                     double sparsify_threshold = kDefaultSparsifyThreshold);

}  // namespace deephate

#endif  // DEEPHATE_TOPICS_H_
