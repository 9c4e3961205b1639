#include "deephate/topics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "deephate/error.h"
#include "deephate/log.h"
#include "deephate/rng.h"

namespace deephate {
namespace internal {
extern const char kStopwordsText[];
}

namespace {

bool ascii_alphabetic(const std::string& token) {
  if (token.empty()) return false;
  for (char c : token) {
    if (c < 'a' || c > 'z') {
      if (c < 'A' || c > 'Z') return false;
    }
  }
  return true;
}

// Mixture of one document's words under fixed topic-word distributions;
// deterministic EM on the document-topic weights only.
std::vector<double> fold_in(const std::vector<int>& words, const TopicModel& model,
                            int iterations = 50) {
  const std::size_t K = static_cast<std::size_t>(model.topics);
  std::vector<double> theta(K, 1.0 / static_cast<double>(K));
  std::vector<double> counts(K);
  std::vector<double> resp(K);
  for (int it = 0; it < iterations; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int w : words) {
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        resp[k] = theta[k] * model.phi(k, static_cast<std::size_t>(w));
        total += resp[k];
      }
      for (std::size_t k = 0; k < K; ++k) counts[k] += resp[k] / total;
    }
    const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * model.alpha;
    for (std::size_t k = 0; k < K; ++k) theta[k] = (counts[k] + model.alpha) / denom;
  }
  return theta;
}

double doc_loglik(const std::vector<int>& words, std::span<const double> theta_row,
                  const Tensor<double>& phi, std::size_t K) {
  double ll = 0.0;
  for (int w : words) {
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) p += theta_row[k] * phi(k, static_cast<std::size_t>(w));
    ll += std::log(p);
  }
  return ll;
}

}  // namespace

void LdaConfig::validate() const {
  if (topics < 1) throw Error("lda: topic count must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("lda: alpha and beta must be positive");
  if (burn_in < 0 || iterations <= burn_in) throw Error("lda: need iterations > burn_in >= 0");
  if (sample_lag < 1) throw Error("lda: sample_lag must be >= 1");
}

std::size_t LdaCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.words.size();
  return n;
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> out;
    std::istringstream in(internal::kStopwordsText);
    std::string w;
    while (in >> w) out.insert(w);
    return out;
  }();
  return words;
}

LdaCorpus filter_corpus_for_lda(const std::vector<const Post*>& posts,
                                const std::unordered_set<std::string>& stopwords,
                                const LdaFilter& filter) {
  std::vector<std::vector<std::string>> docs(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    for (const auto& t : posts[i]->tokens) {
      if (ascii_alphabetic(t) && !stopwords.count(t)) docs[i].push_back(t);
    }
  }
  std::vector<bool> alive(posts.size(), true);
  std::set<std::string> removed_words;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, int> df;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (!alive[i]) continue;
      std::set<std::string> distinct(docs[i].begin(), docs[i].end());
      for (const auto& w : distinct) ++df[w];
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (!alive[i]) continue;
      auto& d = docs[i];
      const std::size_t before = d.size();
      d.erase(std::remove_if(d.begin(), d.end(),
                             [&](const std::string& w) { return df[w] < filter.min_word_posts; }),
              d.end());
      if (d.size() != before) changed = true;
      if (static_cast<int>(d.size()) < filter.min_post_words) {
        alive[i] = false;
        changed = true;
      }
    }
  }

  LdaCorpus out;
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (alive[i]) vocab.insert(docs[i].begin(), docs[i].end());
  }
  out.vocab.assign(vocab.begin(), vocab.end());
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < out.vocab.size(); ++i) index[out.vocab[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!alive[i]) {
      out.dropped_ids.push_back(posts[i]->id);
      continue;
    }
    LdaDocument doc{posts[i]->id, {}};
    for (const auto& w : docs[i]) doc.words.push_back(index.at(w));
    out.docs.push_back(std::move(doc));
  }
  if (out.docs.empty()) throw Error("empty LDA corpus: filtering removed every post");
  return out;
}

void TopicModel::index() {
  kept_.clear();
  words_.clear();
  dropped_.clear();
  for (std::size_t i = 0; i < kept_post_ids.size(); ++i) kept_[kept_post_ids[i]] = i;
  for (std::size_t i = 0; i < vocab.size(); ++i) words_[vocab[i]] = static_cast<int>(i);
  dropped_.insert(dropped_post_ids.begin(), dropped_post_ids.end());
}

std::optional<std::size_t> TopicModel::kept_row(const std::string& post_id) const {
  auto it = kept_.find(post_id);
  if (it == kept_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TopicModel::word_id(const std::string& word) const {
  auto it = words_.find(word);
  if (it == words_.end()) return std::nullopt;
  return it->second;
}

TopicModel fit_lda(const LdaCorpus& corpus, const LdaConfig& config) {
  config.validate();
  if (corpus.docs.empty()) throw Error("fit_lda: empty corpus");
  const std::size_t K = static_cast<std::size_t>(config.topics);
  const std::size_t V = corpus.vocab.size();
  const std::size_t D = corpus.docs.size();
  if (K > V) {
    log::warn("fit_lda: " + std::to_string(K) + " topics exceed " + std::to_string(V) +
              " distinct words");
  }
  const double alpha = config.alpha, beta = config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  Rng rng(mix_seed(config.seed, "lda-gibbs"));
  std::vector<std::vector<int>> z(D);
  std::vector<int> n_dk(D * K, 0), n_kw(K * V, 0), n_k(K, 0);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& words = corpus.docs[d].words;
    z[d].resize(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int k = static_cast<int>(rng.below(K));
      z[d][i] = k;
      ++n_dk[d * K + k];
      ++n_kw[k * V + words[i]];
      ++n_k[k];
    }
  }

  TopicModel model;
  model.topics = config.topics;
  model.alpha = alpha;
  model.beta = beta;
  model.vocab = corpus.vocab;
  model.phi = Tensor<double>(Shape{K, V});
  model.theta = Tensor<double>(Shape{D, K});
  for (const auto& doc : corpus.docs) model.kept_post_ids.push_back(doc.post_id);
  model.dropped_post_ids = corpus.dropped_ids;

  Tensor<double> cur_theta(Shape{D, K});
  Tensor<double> cur_phi(Shape{K, V});
  auto estimate = [&]() {
    for (std::size_t d = 0; d < D; ++d) {
      const double denom =
          static_cast<double>(corpus.docs[d].words.size()) + static_cast<double>(K) * alpha;
      for (std::size_t k = 0; k < K; ++k) cur_theta(d, k) = (n_dk[d * K + k] + alpha) / denom;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double denom = n_k[k] + v_beta;
      for (std::size_t w = 0; w < V; ++w) cur_phi(k, w) = (n_kw[k * V + w] + beta) / denom;
    }
  };

  std::vector<double> p(K);
  int samples = 0;
  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& words = corpus.docs[d].words;
      for (std::size_t i = 0; i < words.size(); ++i) {
        const int w = words[i];
        int k = z[d][i];
        --n_dk[d * K + k];
        --n_kw[k * V + w];
        --n_k[k];
        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (n_dk[d * K + t] + alpha) * (n_kw[t * V + w] + beta) / (n_k[t] + v_beta);
          p[t] = total;
        }
        const double u = rng.uniform() * total;
        k = static_cast<int>(std::upper_bound(p.begin(), p.end(), u) - p.begin());
        if (k >= static_cast<int>(K)) k = static_cast<int>(K) - 1;
        z[d][i] = k;
        ++n_dk[d * K + k];
        ++n_kw[k * V + w];
        ++n_k[k];
      }
    }
    const bool take = sweep >= config.burn_in && (sweep - config.burn_in) % config.sample_lag == 0;
    if (take || config.record_loglik) estimate();
    if (take) {
      for (std::size_t i = 0; i < model.theta.size(); ++i) model.theta[i] += cur_theta[i];
      for (std::size_t i = 0; i < model.phi.size(); ++i) model.phi[i] += cur_phi[i];
      ++samples;
    }
    if (config.record_loglik) {
      double ll = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        ll += doc_loglik(corpus.docs[d].words,
                         cur_theta.data().subspan(d * K, K), cur_phi, K);
      }
      model.sweep_loglik.push_back(ll);
    }
  }
  for (auto& x : model.theta.data()) x /= samples;
  for (auto& x : model.phi.data()) x /= samples;
  model.index();
  return model;
}

double log_likelihood(const TopicModel& model, const LdaCorpus& corpus) {
  const std::size_t K = static_cast<std::size_t>(model.topics);
  double total = 0.0;
  for (const auto& doc : corpus.docs) {
    auto row = model.kept_row(doc.post_id);
    if (!row) throw Error("log_likelihood: post " + doc.post_id + " was not fitted by the model");
    std::vector<int> words;
    words.reserve(doc.words.size());
    for (int w : doc.words) {
      const std::string& word = corpus.vocab.at(static_cast<std::size_t>(w));
      auto id = model.word_id(word);
      if (!id) throw Error("log_likelihood: token '" + word + "' outside the model vocabulary");
      words.push_back(*id);
    }
    total += doc_loglik(words, model.theta.data().subspan(*row * K, K), model.phi, K);
  }
  return total;
}

std::vector<std::pair<int, double>> sweep_topic_count(const LdaCorpus& corpus, int k_min,
                                                      int k_max, const LdaConfig& config) {
  if (k_min < 1 || k_max < k_min) {
    throw Error("sweep_topic_count: empty topic range " + std::to_string(k_min) + ".." +
                std::to_string(k_max));
  }
  std::vector<std::pair<int, double>> out;
  for (int k = k_min; k <= k_max; ++k) {
    LdaConfig c = config;
    c.topics = k;
    c.seed = mix_seed(config.seed, static_cast<std::uint64_t>(k));
    c.record_loglik = false;
    TopicModel m = fit_lda(corpus, c);
    out.emplace_back(k, log_likelihood(m, corpus));
    log::info("topic sweep K=" + std::to_string(k) + " loglik " + std::to_string(out.back().second));
  }
  return out;
}

std::vector<double> infer_topics(const Post& post, const TopicModel& model) {
  const std::size_t K = static_cast<std::size_t>(model.topics);
  const std::vector<double> uniform(K, 1.0 / static_cast<double>(K));
  if (auto row = model.kept_row(post.id)) {
    auto r = model.theta.data().subspan(*row * K, K);
    return {r.begin(), r.end()};
  }
  if (model.was_dropped(post.id)) return uniform;
  std::vector<int> words;
  for (const auto& t : post.tokens) {
    if (auto id = model.word_id(t)) words.push_back(*id);
  }
  if (words.empty()) return uniform;
  return fold_in(words, model);
}

std::vector<double> sparsify(std::span<const double> dist, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw Error("sparsify: threshold must be in [0, 1)");
  std::vector<double> out(dist.begin(), dist.end());
  if (out.empty()) return out;
  const std::size_t best = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
  const double cut = threshold * out[best];
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i != best && out[i] < cut) out[i] = 0.0;
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

double assign_topics(Corpus& corpus, const TopicModel& model, double sparsify_threshold) {
  if (corpus.posts.empty()) return 0.0;
  std::size_t fallback = 0;
  const std::size_t K = static_cast<std::size_t>(model.topics);
  for (auto& post : corpus.posts) {
    auto dist = infer_topics(post, model);
    bool uniform = true;
    for (double x : dist) uniform = uniform && x == 1.0 / static_cast<double>(K);
    if (uniform) ++fallback;
    post.topic_dist = sparsify(dist, sparsify_threshold);
  }
  return static_cast<double>(fallback) / static_cast<double>(corpus.posts.size());
}

}  // namespace deephate
