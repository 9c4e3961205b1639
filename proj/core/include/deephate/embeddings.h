#ifndef DEEPHATE_EMBEDDINGS_H_
#define DEEPHATE_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "deephate/corpus.h"
#include "deephate/encoder.h"
#include "deephate/tensor.h"
#include "deephate/training.h"

namespace deephate {

enum class EmbeddingSource { kGlove, kWord2VecWiki, kParagram, kSentiment, kRandom };

std::string_view source_name(EmbeddingSource source);
EmbeddingSource parse_source(std::string_view name);

// Vocabulary-aligned word vectors. Row 0 (PAD) is all zeros.
struct EmbeddingTable {
  Tensor<float> matrix;
  bool frozen = true;
  EmbeddingSource source = EmbeddingSource::kRandom;
  // Fraction of non-special vocabulary rows found in the source file.
  double coverage = 0.0;

  std::size_t rows() const { return matrix.dim(0); }
  std::size_t dim() const { return matrix.dim(1); }
  std::string sha256() const;
};

inline constexpr double kOovInitRange = 0.05;

// Reads the text embedding format: an optional "count dim" first line, then
// "token v1 ... vd" per line. Tokens outside the file get U(-0.05, 0.05)
// rows from a generator seeded by (seed, source); PAD stays zero.
EmbeddingTable load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab,
                               EmbeddingSource source, std::size_t dim = 300,
                               std::uint64_t seed = 0);

// Table with every non-PAD row drawn from U(-0.05, 0.05).
EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim, EmbeddingSource source,
                            std::uint64_t seed, bool frozen);

void save_embedding_text(const EmbeddingTable& table, const Vocabulary& vocab,
                         const std::filesystem::path& path);

struct SentimentScores {
  double neg = 0.0;
  double neu = 1.0;
  double pos = 0.0;
};

struct SentimentLexicon {
  std::unordered_map<std::string, double> valence;
  std::unordered_set<std::string> negations;
  std::unordered_map<std::string, double> boosters;

  // "token<TAB>valence[<TAB>...]" lines; extra columns are ignored so the
  // public VADER lexicon file loads unchanged. Negations and boosters start
  // from the built-in English lists.
  static SentimentLexicon load(const std::filesystem::path& path);
  static std::unordered_set<std::string> default_negations();
  static std::unordered_map<std::string, double> default_boosters();
};

inline constexpr double kNegationScale = 0.74;
inline constexpr std::size_t kNegationWindow = 3;
inline constexpr std::size_t kBoosterWindow = 2;

// Reduced VADER rule set over normalized tokens: lexicon valence, booster
// increments from the 2 preceding tokens (toward the valence's sign), then a
// sign flip with 0.74 damping when a negation occurs among the 3 preceding
// tokens. P = sum of positive valences, N = sum of |negative| valences,
// U = count of zero-valence tokens; scores = (N, U, P) / (N + U + P), or
// (0, 1, 0) when all three are zero.
SentimentScores score_sentiment(std::span<const std::string> tokens,
                                const SentimentLexicon& lexicon);

// Highest score wins; ties resolve neutral > positive > negative.
SentimentLabel label_sentiment(const SentimentScores& scores);

// "id<TAB>label" with labels negative/neutral/positive.
std::unordered_map<std::string, SentimentLabel> load_sentiment_labels(
    const std::filesystem::path& path);

void save_sentiment_labels(const Corpus& corpus, const std::filesystem::path& path);

// Assigns every post a sentiment: an external label when `external` has its
// id, the built-in scorer otherwise.
void assign_sentiment(Corpus& corpus, const SentimentLexicon& lexicon,
                      const std::unordered_map<std::string, SentimentLabel>* external = nullptr);

// Auxiliary 3-way classifier: trainable embedding table -> C-LSTM-Att
// encoder -> softmax head. Used to learn the sentiment-specific table.
class SentimentEmbeddingModel : public Classifier<float> {
 public:
  SentimentEmbeddingModel(const Vocabulary& vocab, EncoderConfig encoder, int max_len,
                          double dropout_embed, double dropout_fc, std::uint64_t seed);

  ParamSet<float>& params() override { return params_; }
  const ParamSet<float>& params() const override { return params_; }
  std::size_t num_classes() const override { return 3; }
  Var<float> logits(Tape<float>& tape, const Post& post,
                    const ForwardOptions& options) const override;
  int target(const Post& post) const override;
  void after_update() override;

  // Copy of the learned table, marked frozen.
  EmbeddingTable table() const;

 private:
  Vocabulary vocab_;
  EncoderConfig encoder_;
  int max_len_;
  double dropout_embed_;
  double dropout_fc_;
  ParamSet<float> params_;
};

// Trains the sentiment-specific embedding on the posts' sentiment labels and
// returns it frozen. Every post must carry a label; a single-class label set
// is rejected.
EmbeddingTable train_sentiment_embedding(const std::vector<const Post*>& posts,
                                         const Vocabulary& vocab, const EncoderConfig& encoder,
                                         const TrainConfig& config,
                                         TrainHistory* history = nullptr,
                                         const EpochCallback& on_epoch = {});

}  // namespace deephate

#endif  // DEEPHATE_EMBEDDINGS_H_
