// Shared synthetic corpora and small configurations for the test binaries.
#ifndef DEEPHATE_TESTS_FIXTURES_H_
#define DEEPHATE_TESTS_FIXTURES_H_

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "deephate/corpus.h"
#include "deephate/embeddings.h"
#include "deephate/evalx.h"
#include "deephate/rng.h"

namespace deephate::testing {

inline std::filesystem::path fixture_dir() { return DEEPHATE_FIXTURE_DIR; }

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("deephate-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Three lexically separable classes (hate, offensive, neither). Each class
// draws mostly from its own keyword pool, with some shared filler words.
// Hate and offensive posts carry negative sentiment, neither posts positive.
// Post i belongs to class i % 3.
inline Corpus separable_corpus(std::size_t posts, std::uint64_t seed) {
  static const std::array<std::vector<std::string>, 3> pools{{
      {"vermin", "invaders", "parasites", "subhuman", "savages", "plague"},
      {"idiot", "moron", "clown", "loser", "dumbass", "jerk"},
      {"sunshine", "coffee", "garden", "music", "holiday", "puppy"},
  }};
  static const std::vector<std::string> filler{"people", "today", "really", "world", "thing",
                                               "night"};
  Corpus c;
  c.name = "separable";
  c.scheme = ClassScheme({"hate", "offensive", "neither"});
  Rng rng(mix_seed(seed, "separable"));
  for (std::size_t i = 0; i < posts; ++i) {
    const std::size_t cls = i % 3;
    Post p;
    p.id = c.scheme.name(cls) + std::to_string(i / 3);
    p.label_index = static_cast<int>(cls);
    const std::size_t n = 6 + rng.below(5);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& src = rng.uniform() < 0.7 ? pools[cls] : filler;
      p.tokens.push_back(src[rng.below(src.size())]);
    }
    p.sentiment = cls == 2 ? SentimentLabel::kPositive : SentimentLabel::kNegative;
    c.posts.push_back(std::move(p));
  }
  return c;
}

// Small dimensions that keep a full training run within seconds.
inline PipelineConfig small_pipeline(std::uint64_t seed, int epochs = 4) {
  PipelineConfig p;
  p.model.encoder.embed_dim = 12;
  p.model.encoder.filter_widths = {2, 3};
  p.model.encoder.filters = 6;
  p.model.encoder.hidden = 8;
  p.model.encoder.attention_dim = 6;
  p.model.seed = seed;
  p.train.epochs = epochs;
  p.train.batch_size = 8;
  p.train.max_len = 12;
  p.train.seed = seed;
  p.sentiment_train = p.train;
  p.sentiment_train.epochs = 2;
  p.lda.topics = 3;
  p.lda.iterations = 60;
  p.lda.burn_in = 20;
  p.lda.sample_lag = 5;
  p.lda.seed = seed;
  p.lda_filter.min_word_posts = 2;
  p.lda_filter.min_post_words = 2;
  const std::size_t dim = p.model.encoder.embed_dim;
  p.tables = [dim, seed](const Vocabulary& vocab, std::size_t branch) {
    const EmbeddingSource src[3] = {EmbeddingSource::kGlove, EmbeddingSource::kWord2VecWiki,
                                    EmbeddingSource::kParagram};
    return random_table(vocab, dim, src[branch], seed, true);
  };
  return p;
}

}  // namespace deephate::testing

#endif  // DEEPHATE_TESTS_FIXTURES_H_
