#include "deephate/miniature.h"

#include "deephate/autodiff.h"
#include "deephate/params.h"
#include "deephate/rng.h"

namespace deephate {

Miniature make_miniature(std::uint64_t seed, Variant variant, bool freeze_pretrained) {
  Miniature m;
  m.config.encoder.embed_dim = 8;
  m.config.encoder.filter_widths = {2, 3};
  m.config.encoder.filters = 4;
  m.config.encoder.hidden = 6;
  m.config.encoder.attention_dim = 5;
  m.config.topics = 4;
  m.config.classes = 3;
  m.config.max_len = 7;
  m.config.variant = variant;
  m.config.freeze_pretrained = freeze_pretrained;
  m.config.seed = seed;

  std::vector<std::string> words;
  for (int i = 0; i < 18; ++i) words.push_back("w" + std::to_string(i));
  m.vocab = Vocabulary(words);

  EmbeddingTable* slots[4] = {&m.tables.glove, &m.tables.word2vec, &m.tables.paragram,
                              &m.tables.sentiment};
  for (std::size_t b = 0; b < 4; ++b) {
    // Wider than the usual OOV range so every path carries a visible signal.
    Tensor<float> t = uniform_init<float>({m.vocab.size(), 8}, -1.0, 1.0, seed,
                                          "miniature.table." + std::string(kBranchNames[b]));
    for (std::size_t c = 0; c < 8; ++c) t(Vocabulary::kPad, c) = 0.0f;
    slots[b]->matrix = std::move(t);
    slots[b]->source = b == 3 ? EmbeddingSource::kSentiment : EmbeddingSource::kRandom;
  }

  const std::vector<std::vector<std::string>> texts{
      {"w0", "w1", "w2", "w3", "w4", "w5", "w6"},
      {"w7", "w8", "w9", "w10", "w11"},
      {"w12", "w13", "w14", "w15", "w16", "w17", "w0", "w1"}};
  const std::vector<std::vector<double>> topics{
      {0.7, 0.3, 0.0, 0.0}, {0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 0.0, 1.0}};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Post p;
    p.id = "mini" + std::to_string(i);
    p.tokens = texts[i];
    p.label_index = static_cast<int>(i % 3);
    p.topic_dist = topics[i];
    m.posts.push_back(std::move(p));
  }
  return m;
}

ModelGradCheck gradcheck_model(DeepHate<double>& model, const std::vector<const Post*>& posts,
                               bool train, std::uint64_t dropout_seed,
                               const GradCheckOptions& options) {
  const double scale = 1.0 / static_cast<double>(posts.size());
  auto run = [&](GradSet<double>* grads) {
    LossEval e;
    std::uint64_t signature = 0;
    for (std::size_t i = 0; i < posts.size(); ++i) {
      Tape<double> tape;
      ForwardOptions opt{train, mix_seed(dropout_seed, static_cast<std::uint64_t>(i))};
      Var<double> loss = ad::cross_entropy(ad::softmax(model.logits(tape, *posts[i], opt)),
                                           static_cast<std::size_t>(posts[i]->label_index));
      e.loss += scale * loss.value()[0];
      signature = mix_seed(signature ^ tape.relu_signature(), static_cast<std::uint64_t>(i));
      if (grads) {
        tape.backward(loss);
        tape.accumulate_into(*grads, scale);
      }
    }
    e.relu_signature = signature;
    return e;
  };

  GradSet<double> analytic(model.params());
  ModelGradCheck out;
  out.loss = run(&analytic).loss;
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    const auto& p = model.params()[i];
    if (!p.trainable) continue;
    ++out.trainable_arrays;
    bool any = false;
    for (double g : analytic[i].data()) any = any || g != 0.0;
    if (!any) out.zero_gradient_arrays.push_back(p.name);
  }
  out.report = grad_check([&] { return run(nullptr); }, analytic, model.params(), options);
  return out;
}

}  // namespace deephate
