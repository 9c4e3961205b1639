#ifndef DEEPHATE_CORPUS_H_
#define DEEPHATE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deephate {

enum class SentimentLabel { kNegative = 0, kNeutral = 1, kPositive = 2 };

std::string_view sentiment_name(SentimentLabel label);
std::optional<SentimentLabel> parse_sentiment(std::string_view name);

struct RawRecord {
  std::string id;
  std::string text;
  std::string label;
};

struct Post {
  std::string id;
  std::vector<std::string> tokens;
  int label_index = 0;
  std::optional<SentimentLabel> sentiment;
  std::optional<std::vector<double>> topic_dist;
};

// Ordered, unique class names; at least two.
class ClassScheme {
 public:
  ClassScheme() = default;
  explicit ClassScheme(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<int> index_of(std::string_view name) const;

  bool operator==(const ClassScheme&) const = default;

 private:
  std::vector<std::string> names_;
};

// Dense token index with PAD = 0 and UNK = 1 always present.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  // `tokens` excludes the two specials, which are prepended.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  int index(std::string_view token) const;
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int index) const { return index_to_token_.at(index); }
  std::size_t size() const { return index_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return index_to_token_; }

  bool operator==(const Vocabulary& other) const {
    return index_to_token_ == other.index_to_token_;
  }

 private:
  void add(std::string token);

  std::unordered_map<std::string, int> token_to_index_;
  std::vector<std::string> index_to_token_;
};

struct Corpus {
  std::string name;
  std::vector<Post> posts;
  ClassScheme scheme;
  std::optional<Vocabulary> vocab;

  std::size_t size() const { return posts.size(); }
};

// Per-post fold ids. Fold f's held-out share is the posts assigned to f.
struct SplitPlan {
  int fold_count = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> test_indices(int fold) const;
};

// Column mapping and class scheme of one dataset file.
struct DatasetFormat {
  std::string name;
  ClassScheme scheme;
  std::string id_column = "id";
  std::string label_column = "label";
  std::string text_column = "text";
  // Default LDA topic count for this dataset.
  int default_topics = 10;

  // Built-in descriptors for "wz-ls", "dt" and "founta".
  static std::optional<DatasetFormat> preset(std::string_view name);
};

Corpus load_dataset(const std::filesystem::path& path, const DatasetFormat& format);

// Lowercases; URLs become <url>, @mentions become <user>, a leading '#' is
// dropped from hashtags; words and punctuation runs become separate tokens.
std::vector<std::string> normalize_and_tokenize(std::string_view text);

// Keeps tokens with frequency >= min_freq, ordered by (-frequency, token).
Vocabulary build_vocab(const Corpus& corpus, int min_freq);

// Fixed-length index sequence: truncated at the tail, right-padded with PAD.
std::vector<int> encode_post(const Post& post, const Vocabulary& vocab, int max_len);

// Stratified: each class is shuffled with the seed, then dealt round-robin.
SplitPlan make_folds(const Corpus& corpus, int fold_count, std::uint64_t seed);

enum class CombinedClass { kNormal, kInappropriate, kDrop };

// Merges corpora into the binary {normal, inappropriate} scheme. The mapping
// is keyed by source label name, or "dataset:label" for a dataset-specific
// override.
Corpus build_combined(const std::vector<Corpus>& corpora,
                      const std::map<std::string, CombinedClass>& mapping);

// Drops retweets ("rt <user> ...") and exact duplicates of earlier posts'
// normalized text; first occurrence wins.
Corpus dedup_retweets(const Corpus& corpus);

std::vector<std::size_t> class_distribution(const Corpus& corpus);

// Tokenized corpus persistence: header id<TAB>label<TAB>tokens, tokens
// space-joined.
void save_tokenized(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_tokenized(const std::filesystem::path& path, const ClassScheme& scheme,
                      std::string name = {});

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab(const std::filesystem::path& path);

}  // namespace deephate

#endif  // DEEPHATE_CORPUS_H_
