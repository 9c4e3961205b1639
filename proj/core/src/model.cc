#include "deephate/model.h"

#include <algorithm>
#include <unordered_map>

#include "deephate/error.h"
#include "deephate/params.h"
#include "deephate/rng.h"

namespace deephate {

std::string_view variant_name(Variant variant) {
  switch (variant) {
    case Variant::kSemantic: return "Semantic";
    case Variant::kTopicSemantic: return "Topic+Semantic";
    case Variant::kSentimentSemantic: return "Sentiment+Semantic";
    case Variant::kFull: return "DeepHate";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  if (name == "full") return Variant::kFull;
  if (name == "semantic") return Variant::kSemantic;
  if (name == "topic+semantic") return Variant::kTopicSemantic;
  if (name == "sentiment+semantic") return Variant::kSentimentSemantic;
  throw Error("unknown model variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  encoder.validate(static_cast<std::size_t>(std::max(max_len, 1)));
  if (max_len < 1) throw Error("model: max_len must be >= 1");
  if (classes < 2) throw Error("model: need at least 2 classes");
  if (has_topics() && topics < 1) throw Error("model: topic count must be >= 1");
  for (double p : {dropout_embed, dropout_fc}) {
    if (!(p >= 0.0 && p < 1.0)) throw Error("model: dropout rates must lie in [0, 1)");
  }
}

const EmbeddingTable& ModelTables::operator[](std::size_t branch) const {
  switch (branch) {
    case 0: return glove;
    case 1: return word2vec;
    case 2: return paragram;
    case 3: return sentiment;
  }
  throw Error("ModelTables: branch index out of range");
}

template <typename T>
Var<T> combine_semantic(Var<T> x_g, Var<T> x_v, Var<T> x_r, Var<T> a_g, Var<T> a_v, Var<T> a_r) {
  if (x_g.shape().size() != 1 || x_g.shape() != x_v.shape() || x_g.shape() != x_r.shape()) {
    throw Error("combine_semantic: branch vectors " + shape_string(x_g.shape()) + ", " +
                shape_string(x_v.shape()) + ", " + shape_string(x_r.shape()) +
                " are not equal-length vectors");
  }
  for (const Var<T>& a : {a_g, a_v, a_r}) {
    if (a.value().size() != 1) throw Error("combine_semantic: branch weights must be scalars");
  }
  return ad::add(ad::add(ad::mul(x_g, a_g), ad::mul(x_v, a_v)), ad::mul(x_r, a_r));
}

template <typename T>
Var<T> project_topic(Var<T> x_t, Var<T> projection, Var<T> bias) {
  const Shape& ps = projection.shape();
  if (ps.size() != 2 || x_t.shape().size() != 1 || x_t.shape()[0] != ps[1]) {
    throw Error("project_topic: topic vector " + shape_string(x_t.shape()) +
                " does not match projection " + shape_string(ps));
  }
  if (bias.shape() != Shape{ps[0]}) {
    throw Error("project_topic: bias " + shape_string(bias.shape()) + " does not match projection " +
                shape_string(ps));
  }
  return ad::add(ad::matmul(projection, x_t), bias);
}

template <typename T>
Var<T> fuse(Var<T> x_w, Var<T> x_s, Var<T> x_t, Var<T> W_s, Var<T> W_t) {
  Var<T> out = x_w;
  auto term = [&](Var<T> x_aux, Var<T> W, const char* which) {
    if (x_aux.shape() != x_w.shape()) {
      throw Error(std::string("fuse: ") + which + " " + shape_string(x_aux.shape()) +
                  " does not match x_w " + shape_string(x_w.shape()));
    }
    if (!W.valid()) throw Error(std::string("fuse: missing gate weights for ") + which);
    Var<T> gate = ad::sigmoid(ad::matmul(W, ad::add(x_w, x_aux)));
    out = ad::add(out, ad::mul(gate, x_aux));
  };
  if (x_s.valid()) term(x_s, W_s, "x_s");
  if (x_t.valid()) term(x_t, W_t, "x_t");
  return out;
}

namespace {

std::string enc_prefix(std::size_t branch) { return "enc." + std::string(kBranchNames[branch]); }
std::string table_param(std::size_t branch) { return "embed." + std::string(kBranchNames[branch]); }

template <typename T>
Tensor<T> lookup_rows(const Tensor<T>& table, const std::vector<int>& ids) {
  const std::size_t d = table.dim(1);
  Tensor<T> out(Shape{ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<std::size_t>(ids[i]);
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(row * d), d,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

template <typename T>
void zero_pad_row(Tensor<T>& table) {
  for (std::size_t c = 0; c < table.dim(1); ++c) table(Vocabulary::kPad, c) = T(0);
}

}  // namespace

template <typename T>
DeepHate<T>::DeepHate(ModelConfig config, Vocabulary vocab, const ModelTables& tables)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  const std::size_t d = config_.encoder.embed_dim;
  const std::size_t branches = config_.has_sentiment() ? 4 : 3;
  for (std::size_t b = 0; b < branches; ++b) {
    const EmbeddingTable& t = tables[b];
    if (t.matrix.rank() != 2 || t.rows() != vocab_.size() || t.dim() != d) {
      throw Error("DeepHate: " + std::string(kBranchNames[b]) + " table has shape " +
                  shape_string(t.matrix.shape()) + ", expected [" + std::to_string(vocab_.size()) +
                  "x" + std::to_string(d) + "]");
    }
    Tensor<T> m = t.matrix.template cast<T>();
    if (b < 3 && !config_.freeze_pretrained) {
      params_.add(table_param(b), std::move(m));
    } else {
      frozen_[b] = std::move(m);
    }
  }

  const std::uint64_t seed = config_.seed;
  for (std::size_t b = 0; b < branches; ++b) {
    add_encoder_params(params_, enc_prefix(b), config_.encoder, seed);
  }
  for (const char* a : {"semantic.a_g", "semantic.a_v", "semantic.a_r"}) {
    params_.add(a, uniform_init<T>({1}, 0.0, 1.0, seed, a));
  }
  const std::size_t D = config_.fused_dim();
  const std::size_t K = config_.topics;
  const std::size_t C = config_.classes;
  if (config_.has_sentiment()) {
    params_.add("fusion.W_s", glorot_uniform<T>({D, D}, D, D, seed, "fusion.W_s"));
  }
  if (config_.has_topics()) {
    params_.add("fusion.W_t", glorot_uniform<T>({D, D}, D, D, seed, "fusion.W_t"));
    params_.add("fusion.P_t", glorot_uniform<T>({D, K}, K, D, seed, "fusion.P_t"));
    params_.add("fusion.P_t_bias", Tensor<T>(Shape{D}));
  }
  params_.add("head.W", glorot_uniform<T>({C, D}, D, C, seed, "head.W"));
  params_.add("head.b", Tensor<T>(Shape{C}));
}

template <typename T>
Var<T> DeepHate<T>::table_var(Tape<T>& tape, std::size_t branch) const {
  return tape.parameter(params_.get(table_param(branch)));
}

template <typename T>
std::array<Tensor<T>, 4> DeepHate<T>::lookup(const Post& post) const {
  const auto ids = encode_post(post, vocab_, config_.max_len);
  std::array<Tensor<T>, 4> out;
  const std::size_t branches = config_.has_sentiment() ? 4 : 3;
  for (std::size_t b = 0; b < branches; ++b) {
    const bool param = b < 3 && !config_.freeze_pretrained;
    out[b] = lookup_rows(param ? params_.get(table_param(b)).value : frozen_[b], ids);
  }
  return out;
}

template <typename T>
Tensor<T> DeepHate<T>::table(std::size_t branch) const {
  if (branch < 3 && !config_.freeze_pretrained) return params_.get(table_param(branch)).value;
  return frozen_.at(branch);
}

template <typename T>
std::array<Var<T>, 4> DeepHate<T>::embed(Tape<T>& tape, const std::vector<int>& ids,
                                         bool differentiable) const {
  std::array<Var<T>, 4> E;
  const std::size_t branches = config_.has_sentiment() ? 4 : 3;
  for (std::size_t b = 0; b < branches; ++b) {
    if (b < 3 && !config_.freeze_pretrained) {
      E[b] = ad::gather_rows(table_var(tape, b), std::span<const int>(ids));
    } else if (b < 3 && differentiable) {
      E[b] = tape.input(lookup_rows(frozen_[b], ids));
    } else {
      E[b] = tape.constant(lookup_rows(frozen_[b], ids));
    }
  }
  return E;
}

template <typename T>
Var<T> DeepHate<T>::logits_from_inputs(Tape<T>& tape, const std::array<Var<T>, 4>& inputs,
                                       const Post& post, const ForwardOptions& options) const {
  const auto& cfg = config_;
  auto param = [&](const char* name) { return tape.parameter(params_.get(name)); };
  auto branch = [&](std::size_t b) {
    Var<T> E = ad::dropout(inputs[b], cfg.dropout_embed, options.train,
                           mix_seed(options.dropout_seed, "embed." + std::string(kBranchNames[b])));
    return encode(tape, params_, enc_prefix(b), cfg.encoder, E).x;
  };

  Var<T> x_w = combine_semantic(branch(0), branch(1), branch(2), param("semantic.a_g"),
                                param("semantic.a_v"), param("semantic.a_r"));
  const std::size_t D = cfg.fused_dim();

  Var<T> x_s, W_s;
  if (cfg.has_sentiment()) {
    x_s = cfg.zero_sentiment ? tape.constant(Tensor<T>(Shape{D})) : branch(3);
    W_s = param("fusion.W_s");
  }
  Var<T> x_t, W_t;
  if (cfg.has_topics()) {
    if (cfg.zero_topic) {
      x_t = tape.constant(Tensor<T>(Shape{D}));
    } else {
      if (!post.topic_dist) {
        throw Error("post " + post.id + " has no topic distribution; assign topics first");
      }
      const auto& dist = *post.topic_dist;
      if (dist.size() != cfg.topics) {
        throw Error("post " + post.id + " has " + std::to_string(dist.size()) +
                    " topic weights, model expects " + std::to_string(cfg.topics));
      }
      Tensor<T> topic(Shape{dist.size()});
      for (std::size_t k = 0; k < dist.size(); ++k) topic[k] = static_cast<T>(dist[k]);
      x_t = project_topic(tape.constant(std::move(topic)), param("fusion.P_t"),
                          param("fusion.P_t_bias"));
    }
    W_t = param("fusion.W_t");
  }

  Var<T> x_J = fuse(x_w, x_s, x_t, W_s, W_t);
  x_J = ad::dropout(x_J, cfg.dropout_fc, options.train, mix_seed(options.dropout_seed, "fc"));
  return ad::add(ad::matmul(param("head.W"), x_J), param("head.b"));
}

template <typename T>
ForwardTrace<T> DeepHate<T>::trace(Tape<T>& tape, const Post& post, const ForwardOptions& options,
                                   bool differentiable_inputs) const {
  ForwardTrace<T> out;
  out.ids = encode_post(post, vocab_, config_.max_len);
  const auto E = embed(tape, out.ids, differentiable_inputs);
  out.semantic_inputs = {E[0], E[1], E[2]};
  out.logits = logits_from_inputs(tape, E, post, options);
  return out;
}

template <typename T>
Var<T> DeepHate<T>::logits(Tape<T>& tape, const Post& post, const ForwardOptions& options) const {
  return trace(tape, post, options, false).logits;
}

template <typename T>
void DeepHate<T>::after_update() {
  if (config_.freeze_pretrained) return;
  for (std::size_t b = 0; b < 3; ++b) zero_pad_row(params_.get(table_param(b)).value);
}

DeepHate<double> to_double(const DeepHate<float>& model) {
  ModelTables tables;
  const std::size_t branches = model.config().has_sentiment() ? 4 : 3;
  EmbeddingTable* slots[4] = {&tables.glove, &tables.word2vec, &tables.paragram, &tables.sentiment};
  for (std::size_t b = 0; b < branches; ++b) slots[b]->matrix = model.table(b);
  DeepHate<double> out(model.config(), model.vocab(), tables);
  for (std::size_t i = 0; i < out.params().size(); ++i) {
    auto& p = out.params()[i];
    const auto& src = model.params().get(p.name);
    p.value = src.value.cast<double>();
    p.trainable = src.trainable;
  }
  return out;
}

// ---- baselines ----

std::string_view family_name(BaselineFamily family) {
  return family == BaselineFamily::kCnn ? "CNN" : "LSTM";
}

std::string_view unit_name(InputUnit unit) {
  switch (unit) {
    case InputUnit::kWord: return "word";
    case InputUnit::kChar: return "char";
    case InputUnit::kCharBigram: return "char_bigram";
  }
  return "?";
}

BaselineFamily parse_family(std::string_view name) {
  if (name == "CNN" || name == "cnn") return BaselineFamily::kCnn;
  if (name == "LSTM" || name == "lstm") return BaselineFamily::kLstm;
  throw Error("unknown baseline family '" + std::string(name) + "'");
}

InputUnit parse_unit(std::string_view name) {
  for (InputUnit u : {InputUnit::kWord, InputUnit::kChar, InputUnit::kCharBigram}) {
    if (unit_name(u) == name) return u;
  }
  throw Error("unknown input unit '" + std::string(name) + "'");
}

std::string BaselineSpec::label() const {
  const char suffix = unit == InputUnit::kWord ? 'W' : unit == InputUnit::kChar ? 'C' : 'B';
  return std::string(family_name(family)) + "-" + suffix;
}

void BaselineSpec::validate() const {
  if (embed_dim == 0 || hidden == 0 || filters == 0) throw Error("baseline: dimensions must be positive");
  if (max_len < 1) throw Error("baseline: max_len must be >= 1");
  if (classes < 2) throw Error("baseline: need at least 2 classes");
  if (family == BaselineFamily::kCnn) {
    if (filter_widths.empty()) throw Error("baseline: CNN needs at least one filter width");
    for (std::size_t k : filter_widths) {
      if (k < 1 || k > static_cast<std::size_t>(max_len)) {
        throw Error("baseline: filter width " + std::to_string(k) + " exceeds max_len " +
                    std::to_string(max_len));
      }
    }
  }
}

std::vector<std::string> input_units(const Post& post, InputUnit unit) {
  if (unit == InputUnit::kWord) return post.tokens;
  std::string text;
  for (const auto& t : post.tokens) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  std::vector<std::string> out;
  if (unit == InputUnit::kChar) {
    for (char c : text) out.emplace_back(1, c);
  } else {
    for (std::size_t i = 0; i + 1 < text.size(); ++i) out.push_back(text.substr(i, 2));
  }
  return out;
}

Vocabulary build_unit_vocab(const std::vector<const Post*>& posts, InputUnit unit, int min_freq) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const Post* p : posts) {
    for (auto& u : input_units(*p, unit)) ++freq[u];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [u, count] : freq) {
    if (u == Vocabulary::kPadToken || u == Vocabulary::kUnkToken) continue;
    if (count >= static_cast<std::size_t>(std::max(min_freq, 1))) kept.emplace_back(u, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> units;
  for (auto& [u, count] : kept) units.push_back(u);
  return Vocabulary(units);
}

template <typename T>
BaselineModel<T>::BaselineModel(BaselineSpec spec, Vocabulary units)
    : spec_(std::move(spec)), units_(std::move(units)) {
  spec_.validate();
  const std::uint64_t seed = spec_.seed;
  const std::size_t d = spec_.embed_dim, C = spec_.classes;
  Tensor<T> table = uniform_init<T>({units_.size(), d}, -kOovInitRange, kOovInitRange, seed,
                                    "baseline.table");
  zero_pad_row(table);
  params_.add("baseline.table", std::move(table));
  std::size_t features = 0;
  if (spec_.family == BaselineFamily::kCnn) {
    const std::size_t n = spec_.filters;
    for (std::size_t k : spec_.filter_widths) {
      const std::string f = "cnn.k" + std::to_string(k) + ".filters";
      params_.add(f, glorot_uniform<T>({n, k * d}, k * d, n, seed, f));
      params_.add("cnn.k" + std::to_string(k) + ".bias", Tensor<T>(Shape{n}));
    }
    features = n * spec_.filter_widths.size();
  } else {
    const std::size_t z = spec_.hidden;
    for (const char* g : {"W_i", "W_f", "W_o", "W_c"}) {
      const std::string nm = std::string("lstm.") + g;
      params_.add(nm, glorot_uniform<T>({z, z + d}, z + d, z, seed, nm));
    }
    for (const char* b : {"b_i", "b_f", "b_o", "b_c"}) {
      params_.add(std::string("lstm.") + b, Tensor<T>(Shape{z}));
    }
    features = z;
  }
  params_.add("head.W", glorot_uniform<T>({C, features}, features, C, seed, "head.W"));
  params_.add("head.b", Tensor<T>(Shape{C}));
}

template <typename T>
Var<T> BaselineModel<T>::logits(Tape<T>& tape, const Post& post,
                                const ForwardOptions& options) const {
  auto param = [&](const std::string& name) { return tape.parameter(params_.get(name)); };
  const auto units = input_units(post, spec_.unit);
  std::vector<int> ids(static_cast<std::size_t>(spec_.max_len), Vocabulary::kPad);
  for (std::size_t i = 0; i < std::min(units.size(), ids.size()); ++i) ids[i] = units_.index(units[i]);

  Var<T> E = ad::gather_rows(param("baseline.table"), std::span<const int>(ids));
  E = ad::dropout(E, spec_.dropout_embed, options.train, mix_seed(options.dropout_seed, "embed"));
  Var<T> x;
  if (spec_.family == BaselineFamily::kCnn) {
    std::vector<Var<T>> pooled;
    for (std::size_t k : spec_.filter_widths) {
      const std::string p = "cnn.k" + std::to_string(k);
      pooled.push_back(ad::max_over_rows(conv_feature_map(E, param(p + ".filters"), param(p + ".bias"))));
    }
    x = pooled.size() == 1 ? pooled.front() : ad::concat(pooled, 0);
  } else {
    LstmVars<T> lstm{param("lstm.W_i"), param("lstm.W_f"), param("lstm.W_o"), param("lstm.W_c"),
                     param("lstm.b_i"), param("lstm.b_f"), param("lstm.b_o"), param("lstm.b_c")};
    Var<T> H = lstm_forward(E, lstm);
    Tensor<T> last(Shape{ids.size()});
    last[ids.size() - 1] = T(1);
    x = ad::matmul(H, tape.constant(std::move(last)));
  }
  x = ad::dropout(x, spec_.dropout_fc, options.train, mix_seed(options.dropout_seed, "fc"));
  return ad::add(ad::matmul(param("head.W"), x), param("head.b"));
}

template <typename T>
void BaselineModel<T>::after_update() {
  zero_pad_row(params_.get("baseline.table").value);
}

#define DEEPHATE_INSTANTIATE_MODEL(T)                                                  \
  template Var<T> combine_semantic<T>(Var<T>, Var<T>, Var<T>, Var<T>, Var<T>, Var<T>); \
  template Var<T> project_topic<T>(Var<T>, Var<T>, Var<T>);                            \
  template Var<T> fuse<T>(Var<T>, Var<T>, Var<T>, Var<T>, Var<T>);                     \
  template class DeepHate<T>;                                                          \
  template class BaselineModel<T>;

DEEPHATE_INSTANTIATE_MODEL(float)
DEEPHATE_INSTANTIATE_MODEL(double)

}  // namespace deephate
