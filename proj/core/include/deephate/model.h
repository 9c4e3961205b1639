#ifndef DEEPHATE_MODEL_H_
#define DEEPHATE_MODEL_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "deephate/autodiff.h"
#include "deephate/corpus.h"
#include "deephate/embeddings.h"
#include "deephate/encoder.h"
#include "deephate/training.h"

namespace deephate {

// Which modalities take part in fusion. Rows of the ablation table, in
// reporting order.
enum class Variant { kSemantic, kTopicSemantic, kSentimentSemantic, kFull };

inline constexpr std::array<Variant, 4> kAllVariants{
    Variant::kSemantic, Variant::kTopicSemantic, Variant::kSentimentSemantic, Variant::kFull};

std::string_view variant_name(Variant variant);
Variant parse_variant(std::string_view name);

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t topics = 10;
  std::size_t classes = 3;
  Variant variant = Variant::kFull;
  // Keep a modality's parameters but feed a zero vector in its place. Used
  // to check that an ablated variant equals the full model with inputs
  // zeroed.
  bool zero_sentiment = false;
  bool zero_topic = false;
  // When false the three pretrained tables become trainable parameters.
  // The sentiment table is always frozen.
  bool freeze_pretrained = true;
  int max_len = 50;
  double dropout_embed = 0.5;
  double dropout_fc = 0.2;
  std::uint64_t seed = 0;

  bool has_sentiment() const {
    return variant == Variant::kFull || variant == Variant::kSentimentSemantic;
  }
  bool has_topics() const {
    return variant == Variant::kFull || variant == Variant::kTopicSemantic;
  }
  std::size_t fused_dim() const { return encoder.output_dim(); }
  void validate() const;
};

// Branch order used throughout: glove, word2vec-wiki, paragram, sentiment.
inline constexpr std::array<std::string_view, 4> kBranchNames{"glove", "word2vec", "paragram",
                                                              "sentiment"};

struct ModelTables {
  EmbeddingTable glove;
  EmbeddingTable word2vec;
  EmbeddingTable paragram;
  // May be empty for variants without the sentiment modality.
  EmbeddingTable sentiment;

  const EmbeddingTable& operator[](std::size_t branch) const;
};

// x_w = a_g x_g + a_v x_v + a_r x_r.
template <typename T>
Var<T> combine_semantic(Var<T> x_g, Var<T> x_v, Var<T> x_r, Var<T> a_g, Var<T> a_v, Var<T> a_r);

// P x_t + bias: a K-vector lifted to the fused dimension.
template <typename T>
Var<T> project_topic(Var<T> x_t, Var<T> projection, Var<T> bias);

// x_J = x_w + sigma(W_s(x_w + x_s)) * x_s + sigma(W_t(x_w + x_t)) * x_t with
// elementwise products. An invalid (default-constructed) x_s or x_t drops
// that term; W_s / W_t may then be invalid too.
template <typename T>
Var<T> fuse(Var<T> x_w, Var<T> x_s, Var<T> x_t, Var<T> W_s, Var<T> W_t);

template <typename T>
struct ForwardTrace {
  Var<T> logits;
  // Encoder inputs [L, d] per branch (glove, word2vec, paragram), before
  // embedding dropout. Differentiable when requested.
  std::array<Var<T>, 3> semantic_inputs;
  std::vector<int> ids;
};

template <typename T>
class DeepHate : public Classifier<T> {
 public:
  DeepHate(ModelConfig config, Vocabulary vocab, const ModelTables& tables);

  ParamSet<T>& params() override { return params_; }
  const ParamSet<T>& params() const override { return params_; }
  std::size_t num_classes() const override { return config_.classes; }
  Var<T> logits(Tape<T>& tape, const Post& post, const ForwardOptions& options) const override;
  void after_update() override;

  // Forward pass that keeps handles on the semantic encoder inputs. With
  // differentiable_inputs the frozen-table lookups enter the tape as inputs
  // so their gradients can be read back.
  ForwardTrace<T> trace(Tape<T>& tape, const Post& post, const ForwardOptions& options,
                        bool differentiable_inputs) const;

  // Same forward from explicit encoder inputs, bypassing the table lookup.
  // inputs[3] is ignored when the model has no sentiment branch.
  Var<T> logits_from_inputs(Tape<T>& tape, const std::array<Var<T>, 4>& inputs,
                            const Post& post, const ForwardOptions& options) const;

  // Row lookups of the post in every table, each [L, d].
  std::array<Tensor<T>, 4> lookup(const Post& post) const;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  // Current table for a branch, trained rows included.
  Tensor<T> table(std::size_t branch) const;

 private:
  Var<T> table_var(Tape<T>& tape, std::size_t branch) const;
  std::array<Var<T>, 4> embed(Tape<T>& tape, const std::vector<int>& ids, bool differentiable) const;

  ModelConfig config_;
  Vocabulary vocab_;
  std::array<Tensor<T>, 4> frozen_;  // empty where the table is a parameter
  ParamSet<T> params_;
};

// Copy of a float model's parameters and tables converted to double, for
// finite-difference checks.
DeepHate<double> to_double(const DeepHate<float>& model);

// Comparison models.
enum class BaselineFamily { kCnn, kLstm };
enum class InputUnit { kWord, kChar, kCharBigram };

std::string_view family_name(BaselineFamily family);
std::string_view unit_name(InputUnit unit);
BaselineFamily parse_family(std::string_view name);
InputUnit parse_unit(std::string_view name);

struct BaselineSpec {
  BaselineFamily family = BaselineFamily::kCnn;
  InputUnit unit = InputUnit::kWord;
  std::size_t embed_dim = 300;
  std::vector<std::size_t> filter_widths{3, 4, 5};
  std::size_t filters = 50;
  std::size_t hidden = 200;
  // Sequence length in units; characters need more room than words.
  int max_len = 50;
  std::size_t classes = 3;
  double dropout_embed = 0.5;
  double dropout_fc = 0.2;
  std::uint64_t seed = 0;

  // Short label such as "CNN-W" or "LSTM-B".
  std::string label() const;
  void validate() const;
};

// Words are the post's tokens; characters and character bigrams run over
// the tokens joined by single spaces, byte by byte.
std::vector<std::string> input_units(const Post& post, InputUnit unit);

Vocabulary build_unit_vocab(const std::vector<const Post*>& posts, InputUnit unit,
                            int min_freq = 1);

// CNN: per-width valid convolution, ReLU, global max pooling over time,
// concatenation, softmax head. LSTM: single LSTM, final hidden state, softmax
// head. Both learn a randomly initialized table.
template <typename T>
class BaselineModel : public Classifier<T> {
 public:
  BaselineModel(BaselineSpec spec, Vocabulary units);

  ParamSet<T>& params() override { return params_; }
  const ParamSet<T>& params() const override { return params_; }
  std::size_t num_classes() const override { return spec_.classes; }
  Var<T> logits(Tape<T>& tape, const Post& post, const ForwardOptions& options) const override;
  void after_update() override;

  const BaselineSpec& spec() const { return spec_; }
  const Vocabulary& units() const { return units_; }

 private:
  BaselineSpec spec_;
  Vocabulary units_;
  ParamSet<T> params_;
};

}  // namespace deephate

#endif  // DEEPHATE_MODEL_H_
